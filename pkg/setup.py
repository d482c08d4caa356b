import os

from setuptools import find_packages, setup

here = os.path.dirname(os.path.abspath(__file__))


def read_version_file():
    """
    Metadata and requirements live in crashblame/version.py so the package
    does not have to be importable at install time.
    """
    lookup = {}
    with open(os.path.join(here, "crashblame", "version.py")) as fd:
        exec(fd.read(), lookup)
    return lookup


def requirements(lookup, key):
    found = []
    for name, meta in lookup[key]:
        if meta.get("exact_version"):
            found.append("%s==%s" % (name, meta["exact_version"]))
        elif meta.get("min_version"):
            found.append("%s>=%s" % (name, meta["min_version"]))
        else:
            found.append(name)
    return found


def long_description(fallback):
    try:
        with open(os.path.join(here, "README.md")) as fd:
            return fd.read()
    except OSError:
        return fallback


if __name__ == "__main__":
    lookup = read_version_file()
    setup(
        name=lookup["NAME"],
        version=lookup["__version__"],
        author=lookup["AUTHOR"],
        maintainer=lookup["AUTHOR"],
        packages=find_packages(exclude=["tests", "tests.*"]),
        python_requires=">=3.8",
        include_package_data=True,
        zip_safe=False,
        url=lookup["PACKAGE_URL"],
        license=lookup["LICENSE"],
        description=lookup["DESCRIPTION"],
        long_description=long_description(lookup["DESCRIPTION"]),
        long_description_content_type="text/markdown",
        keywords=lookup["KEYWORDS"],
        install_requires=requirements(lookup, "INSTALL_REQUIRES"),
        tests_require=requirements(lookup, "TESTS_REQUIRES"),
        extras_require={"all": requirements(lookup, "INSTALL_REQUIRES_ALL")},
        classifiers=[
            "Intended Audience :: Science/Research",
            "Intended Audience :: Developers",
            "License :: OSI Approved :: MIT License",
            "Programming Language :: Python",
            "Topic :: Software Development :: Debuggers",
            "Topic :: Scientific/Engineering :: Artificial Intelligence",
            "Operating System :: OS Independent",
            "Programming Language :: Python :: 3.8",
            "Programming Language :: Python :: 3.9",
        ],
        entry_points={"console_scripts": ["crashblame=crashblame.client:run_crashblame"]},
    )
