"""Interop surface: PNML serialization and the `hashnets` command line."""

from hashnets.interop_cli.pnml import (
    InvalidId,
    PnmlError,
    PnmlParseError,
    UnsupportedNetType,
    export_pnml,
    import_pnml,
)

__all__ = [
    "InvalidId",
    "PnmlError",
    "PnmlParseError",
    "UnsupportedNetType",
    "export_pnml",
    "import_pnml",
]
