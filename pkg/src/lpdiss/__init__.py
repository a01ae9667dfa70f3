"""L^p-dissipativity criteria and numerical oracles for elliptic operators."""

__version__ = "0.1.0"
