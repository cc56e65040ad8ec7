"""
Consistent-polarity scoring: every token of a term gets the scores of the
term's max-pooled decoder states, so all of them receive the same label.
"""

from typing import Sequence, Tuple, Union

import numpy as np

from decoding.spans import TokenBoundaries, extract_boundaries, repair_bio_ids
from model.layers import linear
from model.params import ModelParams
from numcore import ops
from numcore.tensor import DiffTensor
from utils.errors import ShapeError


def batch_boundaries(term_ids: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    (batch, positions) begin/end arrays from term-tag ids.

    Rows are BIO-repaired first; `O`, special and padded positions (all
    tagged `O`) become singletons.
    """
    term_ids = np.atleast_2d(np.asarray(term_ids, dtype=np.int64))
    begins = np.empty_like(term_ids)
    ends = np.empty_like(term_ids)
    for row, ids in enumerate(term_ids):
        bounds = extract_boundaries(repair_bio_ids(ids))
        begins[row], ends[row] = bounds.arrays()
    return begins, ends


def consistent_polarity(
    decoder_states: DiffTensor,
    boundaries: Union[TokenBoundaries, Sequence[TokenBoundaries], Tuple[np.ndarray, np.ndarray]],
    params: ModelParams,
) -> DiffTensor:
    """
    Per-token polarity scores from span-pooled decoder states.

    g_i is the elementwise max of the decoder rows of token i's span,
    h_i = ReLU(g_i W_h + b_h), and the scores are h_i through the ASC head.
    """
    if isinstance(boundaries, TokenBoundaries):
        boundaries = [boundaries]
    if isinstance(boundaries, tuple) and len(boundaries) == 2 and isinstance(boundaries[0], np.ndarray):
        begins, ends = boundaries
    else:
        begins = np.stack([b.arrays()[0] for b in boundaries])
        ends = np.stack([b.arrays()[1] for b in boundaries])
    if begins.shape != decoder_states.shape[:2]:
        raise ShapeError(f"boundaries cover {begins.shape}, decoder states {decoder_states.shape[:2]}")

    pooled = ops.span_max(decoder_states, begins, ends)
    hidden = ops.relu(linear(pooled, params, "polarity_head"))
    return linear(hidden, params, "asc_head")
