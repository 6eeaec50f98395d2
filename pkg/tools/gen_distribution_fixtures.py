"""Generate high-precision CDF spot-check fixtures with mpmath.

Run from the repo root; writes tests/data/distribution_spot_checks.csv with
rows (distribution, params, x, expected). The expected values come from
arbitrary-precision evaluation (50 significant digits) of independent
formulations: incomplete beta/gamma identities for the central
distributions, mpmath adaptive quadrature for noncentral t, and the
Poisson-mixture series for noncentral F.
"""

import csv
import pathlib

import mpmath as mp

mp.mp.dps = 50


def normal_cdf(x):
    return 0.5 * mp.erfc(-x / mp.sqrt(2))


def t_cdf(x, df):
    x, df = mp.mpf(x), mp.mpf(df)
    tail = 0.5 * mp.betainc(df / 2, mp.mpf("0.5"), 0, df / (df + x * x), regularized=True)
    return tail if x < 0 else 1 - tail


def f_cdf(x, d1, d2):
    x, d1, d2 = mp.mpf(x), mp.mpf(d1), mp.mpf(d2)
    z = d1 * x / (d1 * x + d2)
    return mp.betainc(d1 / 2, d2 / 2, 0, z, regularized=True)


def chi2_pdf(v, df):
    h = mp.mpf(df) / 2
    return v ** (h - 1) * mp.e ** (-v / 2) / (mp.gamma(h) * 2**h)


def nct_cdf(x, df, nc):
    x, df, nc = mp.mpf(x), mp.mpf(df), mp.mpf(nc)

    def integrand(v):
        return normal_cdf(x * mp.sqrt(v / df) - nc) * chi2_pdf(v, df)

    return mp.quad(integrand, [0, df, df * 4, mp.inf])


def chi2_cdf(x, df):
    return mp.gammainc(mp.mpf(df) / 2, 0, mp.mpf(x) / 2, regularized=True)


def ncf_cdf(x, d1, d2, nc):
    x, d1, d2, nc = mp.mpf(x), mp.mpf(d1), mp.mpf(d2), mp.mpf(nc)
    z = d1 * x / (d1 * x + d2)
    total = mp.mpf(0)
    for j in range(400):
        w = mp.e ** (-nc / 2) * (nc / 2) ** j / mp.factorial(j)
        total += w * mp.betainc(d1 / 2 + j, d2 / 2, 0, z, regularized=True)
    return total


def main():
    rows = []
    for x in [-3.0, -2.0, -1.0, -0.5, -0.1, 0.0, 0.3, 1.0, 1.959964, 3.5]:
        rows.append(("normal", "", x, normal_cdf(x)))
    for x, df in [(-4, 3), (-2, 5), (-1, 10), (-0.3, 7), (0, 4), (0.5, 2), (1, 30), (2, 198), (2.7764, 4), (5, 12)]:
        rows.append(("t", f"df={df}", x, t_cdf(x, df)))
    for x, d1, d2 in [(0.1, 1, 10), (0.5, 2, 20), (1, 3, 5), (1.5, 1, 398), (2, 5, 50),
                      (2.5, 4, 8), (3.84, 1, 1000), (4, 2, 2), (5, 10, 10), (10, 1, 30)]:
        rows.append(("f", f"df1={d1};df2={d2}", x, f_cdf(x, d1, d2)))
    for x, df, nc in [(-1, 10, 2), (0, 5, 1), (0.5, 198, 2.8284271247461903), (1, 30, 0.5),
                      (1.5, 7, 1.5), (1.972, 198, 2.8284271247461903), (2, 4, 2), (2.5, 60, 3),
                      (3, 198, 2.8284271247461903), (5, 15, 3.5)]:
        rows.append(("nct", f"df={df};nc={nc}", x, nct_cdf(x, df, nc)))
    for x, d1, d2, nc in [(0.5, 1, 398, 7.84), (1, 1, 398, 7.84), (2, 2, 50, 4), (3, 1, 100, 2),
                          (3.86, 1, 398, 7.84), (4, 3, 30, 6), (5, 1, 398, 7.84), (6, 2, 20, 10),
                          (8, 1, 50, 7.84), (12, 4, 12, 3)]:
        rows.append(("ncf", f"df1={d1};df2={d2};nc={nc}", x, ncf_cdf(x, d1, d2, nc)))

    out = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data" / "distribution_spot_checks.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["distribution", "params", "x", "expected"])
        for dist, params, x, value in rows:
            writer.writerow([dist, params, repr(float(x)), mp.nstr(value, 17)])
    print(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main()
