"""Connectivity probability as k grows, with Wilson confidence bands."""

from rggconn.experiments import connectivity_sweep


def main():
    n = 512.0
    rows, degenerate, wall = connectivity_sweep(n, range(1, 9), trials=80, seed=23)
    print(f"n={n:g}, 80 trials per k ({wall:.1f}s, {degenerate} degenerate resamples)")
    for row in rows:
        bar = "#" * round(40 * row.p_hat)
        print(f"k={row.k}: p={row.p_hat:.3f} [{row.ci_lo:.3f}, {row.ci_hi:.3f}] {bar}")


if __name__ == "__main__":
    main()
