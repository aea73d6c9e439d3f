from .export import (
    file_sha256,
    read_chain_csv,
    read_proposal_history,
    read_series,
    read_series_csv,
    read_series_json,
    series_digest,
    write_acf_csv,
    write_chain_csv,
    write_histogram_csv,
    write_manifest,
    write_proposal_history,
    write_rows_csv,
    write_series_csv,
    write_series_json,
)
