"""Mutual contact discovery protocol suite.

Token-based contact matching between members of a low-entropy identifier
space (phone-number-like), built around an untrusted matching server that
only ever sees fixed-length hashed token tuples.  Ships three protocol
variants (certificate/pairing based, KDF based, DH key-server based), the
supporting services (matching server, key server, gated key directory),
and a deterministic simulation harness with an ideal-model oracle.
"""

__version__ = "0.1.0"
