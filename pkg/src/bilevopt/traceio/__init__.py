from .report import read_report_json, report_envelope, write_report_json
from .runspec import (RunSpec, SCHEMA_VERSION, execute, parse_runspec,
                      schema_documentation)
from .trace import (CSV_HEADER, Trace, TraceRecord, csv_projection,
                    read_trace_csv, rows_equal, write_trace_csv)

__all__ = [
    "CSV_HEADER",
    "RunSpec",
    "SCHEMA_VERSION",
    "Trace",
    "TraceRecord",
    "csv_projection",
    "execute",
    "parse_runspec",
    "read_report_json",
    "read_trace_csv",
    "report_envelope",
    "rows_equal",
    "schema_documentation",
    "write_report_json",
    "write_trace_csv",
]
