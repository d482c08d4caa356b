from .fileio import (
    csv_text,
    mkdir_p,
    read_file,
    read_json,
    read_yaml,
    write_bytes,
    write_csv,
    write_file,
    write_files,
)
