"""Python interface to the colfw kernel.

All functions take the signature source text. `check` returns diagnostics as
dicts; `validity` reports per-definition productivity verdicts; `unfold`,
`erase_type`, and `pretty` return printed text. Elaboration failures raise
ValueError, unknown names KeyError.
"""

from ._colfw import check, erase_type, pretty, unfold, validity

__all__ = ["check", "erase_type", "pretty", "unfold", "validity"]
