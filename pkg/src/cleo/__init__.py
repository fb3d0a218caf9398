"""CLEO: interactive preference elicitation over hybrid configuration spaces.

Learns a sparse combinatorial utility from pairwise comparisons and
recommends configurations by weighted Max-SMT.
"""

__version__ = "0.1.0"
