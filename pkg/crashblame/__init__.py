from crashblame.version import __version__
