# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled BM25 score accumulation; twin of kgqa._scoring_py.

No fast-math flags: results must stay bit-identical to the pure-Python
kernel (same IEEE double operations, same order).
"""


def accumulate_term(const int[::1] doc_idx, const double[::1] tf, double idf,
                    const double[::1] norm, double k1, double[::1] scores):
    cdef Py_ssize_t j, n = doc_idx.shape[0]
    cdef int d
    cdef double t
    cdef double k1p1 = k1 + 1.0
    for j in range(n):
        d = doc_idx[j]
        t = tf[j]
        scores[d] = scores[d] + idf * (t * k1p1) / (t + norm[d])
