"""Anonymous-credential identity lifecycle on a simulated UTXO ledger."""

__version__ = "0.1.0"
