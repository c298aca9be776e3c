"""Pure-Python BM25 score accumulation.

Mirrors kgqa._scoring_c term for term: both kernels evaluate
``idf * (tf * (k1 + 1)) / (tf + norm[d])`` in the same order, so their
outputs are bit-identical IEEE doubles.
"""


def accumulate_term(doc_idx, tf, idf, norm, k1, scores):
    """Add one query term's contribution to ``scores`` in place.

    doc_idx/tf are the term's posting list, norm[d] the precomputed
    length normalization ``k1 * (1 - b + b * len_d / avgdl)``.
    """
    k1p1 = k1 + 1.0
    for j in range(len(doc_idx)):
        d = doc_idx[j]
        t = tf[j]
        scores[d] = scores[d] + idf * (t * k1p1) / (t + norm[d])
