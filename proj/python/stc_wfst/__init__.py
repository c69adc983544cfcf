"""Differentiable WFST losses (CTC / selfless-CTC / STC) over the log semiring."""

try:
    from ._core import *  # noqa: F401,F403  (installed layout)
    from ._core import __doc__ as _core_doc
except ImportError:  # in-tree build: _core.so sits on PYTHONPATH
    from _core import *  # noqa: F401,F403
    from _core import __doc__ as _core_doc

__all__ = [
    "Graph",
    "compose",
    "forward_score",
    "ctc_loss",
    "selfless_ctc_loss",
    "stc_loss",
    "build_emission",
    "build_ctc_label",
    "build_selfless_ctc_label",
    "build_stc_label",
    "PenaltySchedule",
    "greedy_decode",
    "edit_distance_rate",
    "export_text",
    "export_dot",
    "parse_text",
]
