"""evidex: structured clinical-trial findings, end to end.

Linearize findings for a text-to-text generator, parse generations back into
structured tuples, evaluate them against references, and serve them through a
BM25-backed search store.
"""

__version__ = "0.1.0"
