"""Configuration language frontend: parse, validate, pretty-print."""

from hashnets.ahcl.ast import (
    Channel,
    Collective,
    Component,
    Group,
    Mode,
    Port,
    PortRef,
    Unit,
)
from hashnets.ahcl.parser import parse_configuration
from hashnets.ahcl.preprocess import expand_iterators
from hashnets.ahcl.printer import print_configuration
from hashnets.ahcl.validate import validate_configuration

__all__ = [
    "Channel",
    "Collective",
    "Component",
    "Group",
    "Mode",
    "Port",
    "PortRef",
    "Unit",
    "expand_iterators",
    "parse_configuration",
    "print_configuration",
    "validate_configuration",
]
