"""Private dense coding toolkit.

Computes the asymptotic and finite-length secrecy/reliability/completeness
bounds for private dense coding over Pauli channels, runs the full
classical-equivalent protocol with adversary modes, and verifies the
underlying entropy identities and leakage bounds against an exact
small-dimension quantum oracle.
"""

__version__ = "0.1.0"
