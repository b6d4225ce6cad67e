"""Regenerate ``lowdisc/data/sobol_directions.txt``.

Initial direction numbers are the first entries of the Joe & Kuo
``new-joe-kuo-6.21201`` table (primitive polynomial degree ``s``,
coefficient word ``a``, initial odd integers ``m``). The first dimension is
the van der Corput sequence.

File layout: a header line ``dims precision``, then ``dims * precision``
lines, one integer per line: the generating-matrix columns of dimension 0
(column 0 first), then dimension 1, and so on. Column ``j`` of each
dimension has its leading bit at row ``j``, counted from the most
significant of ``precision`` bits.
"""

from pathlib import Path

PRECISION = 32

# (s, a, m_1..m_s) for dimensions 2..8
JOE_KUO = [
    (1, 0, [1]),
    (2, 1, [1, 3]),
    (3, 1, [1, 3, 1]),
    (3, 2, [1, 1, 1]),
    (4, 1, [1, 1, 3, 3]),
    (4, 4, [1, 3, 5, 13]),
    (5, 2, [1, 1, 5, 5, 17]),
]


def columns(s, a, m_init, precision=PRECISION):
    m = list(m_init)
    for i in range(s, precision):
        new = m[i - s] ^ (m[i - s] << s)
        for k in range(1, s):
            if (a >> (s - 1 - k)) & 1:
                new ^= m[i - k] << k
        m.append(new)
    return [m[i] << (precision - 1 - i) for i in range(precision)]


def main():
    dims = [[1 << (PRECISION - 1 - i) for i in range(PRECISION)]]
    dims += [columns(s, a, m) for s, a, m in JOE_KUO]
    out = Path(__file__).resolve().parents[1] / "src/mcmsurvey/lowdisc/data/sobol_directions.txt"
    lines = [f"{len(dims)} {PRECISION}"]
    lines += [str(c) for cols in dims for c in cols]
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out} ({len(dims)} dims)")


if __name__ == "__main__":
    main()
