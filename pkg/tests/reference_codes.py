"""Published reference layouts of four small codes, transcribed by hand.

Rows are relays, columns are time slots, and entries use 1-based indices:
``h2*s1*`` is ``conj(h_2) conj(s_1)``, a leading ``-`` flips the sign.

``SUSPECT`` lists ``(row, column)`` positions (0-based) where the published
layout cannot be right: the entry pairs a plain ``h`` with a conjugated
``s``, or names the wrong relay's gain, and no code of the form
``h_k s A_k + conj(h_k s) B_k`` can produce it.
"""

import re

import numpy as np

_TOKEN = re.compile(r"^(-?)h(\d+)(\*?)s(\d+)(\*?)$")

_X44 = """
h1s1   -h1s2  h1s3   -h1s4  0      0      0      0
h2*s2* h2*s1* h2*s4* h2s3*  0      0      0      0
0      0      0      0      h3s1   -h3s2  h3s3   -h3s4
0      0      0      0      h4*s2* h4*s1* h4*s4* h4s3*
"""

_X54 = """
h1s1   -h1s2  h1s3   -h1s4  0      0      0      0      h1s5 0    0    0
h2*s2* h2*s1* h2*s4* h2s3*  0      0      0      0      0    h2s5 0    0
0      0      0      0      h3s1   -h3s2  h3s3   -h3s4  0    0    h3s5 0
0      0      0      0      h4*s2* h4*s1* h4*s4* h4s3*  0    0    0    h4s5
"""

_X45 = """
h1s1   -h1s2  h1s3   -h1s4  0      0      0      0      0    0    0    0
h2*s2* h2*s1* h2*s4* h2s3*  0      0      0      0      0    0    0    0
0      0      0      0      h3s1   -h3s2  h3s3   -h3s4  0    0    0    0
0      0      0      0      h4*s2* h4*s1* h4*s4* h4s3*  0    0    0    0
0      0      0      0      0      0      0      0      h5s1 h5s2 h5s3 h5s4
"""

_X55 = """
h1s2   -h1s3  h1s4   -h1s5  0      0      0      0      h1*s1* h1*s5* 0      0      0      0       0
h2*s3* h2*s2* h2*s5* h2s4*  0      0      0      0      0      0      0      0      h2s1   -h2s3   0
0      0      0      0      h3s1   -h3s3  h3s4   -h3s5  0      0      h3*s2* h3*s4* 0      0       0
0      0      0      0      h4*s3* h4*s1* h4*s5* h4s4*  0      0      0      0      0      0       h4s2
0      0      0      0      0      0      0      0      h5s5   -h5s1  h5s4   -h5s2  h3*s3* h5*s1*  0
"""

LAYOUTS = {(4, 4): _X44, (5, 4): _X54, (4, 5): _X45, (5, 5): _X55}

SUSPECT = {
    (4, 4): {(1, 3), (3, 7)},
    (5, 4): {(1, 3), (3, 7)},
    (4, 5): {(1, 3), (3, 7)},
    (5, 5): {(1, 3), (3, 7), (4, 12)},
}


def layout(n, k):
    """Reference layout for ``(N, K)`` as a list of rows of tokens."""
    return [line.split() for line in LAYOUTS[(n, k)].strip().splitlines()]


def parse(token):
    """``(sign, relay, h_conj, symbol, s_conj)`` with 0-based indices, or None for 0."""
    if token == "0":
        return None
    m = _TOKEN.match(token)
    if m is None:
        raise ValueError(f"bad token {token!r}")
    sign, k, hc, n, sc = m.groups()
    return (-1 if sign else 1, int(k) - 1, bool(hc), int(n) - 1, bool(sc))


def render(code):
    """Layout of a code in the same notation, one row per relay."""
    a, b = code.a_stack, code.b_stack
    rows = []
    for k in range(code.n_relays):
        row = []
        for t in range(code.length):
            tok = "0"
            for mat, star in ((a, ""), (b, "*")):
                nz = np.flatnonzero(mat[k, :, t])
                if len(nz):
                    n = nz[0]
                    v = mat[k, n, t]
                    sign = {1: "", -1: "-"}[int(v.real)] if v.imag == 0 else None
                    if sign is None:
                        raise ValueError("reference layouts have real entries only")
                    tok = f"{sign}h{k + 1}{star}s{n + 1}{star}"
            row.append(tok)
        rows.append(row)
    return rows


def differences(code, n, k):
    """Positions where ``code`` and the reference layout disagree."""
    ref = layout(n, k)
    got = render(code)
    if len(ref) != len(got) or any(len(r) != len(g) for r, g in zip(ref, got)):
        return None
    return {(i, j) for i, (r, g) in enumerate(zip(ref, got))
            for j, (x, y) in enumerate(zip(r, g)) if x != y}
