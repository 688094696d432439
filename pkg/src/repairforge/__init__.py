"""Binary MDS erasure codes with optimal repair via XOR-only pairing transforms."""

__version__ = "0.1.0"
