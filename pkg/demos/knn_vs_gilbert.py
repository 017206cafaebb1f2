"""One sample, two graph models: nearest-neighbour lists against a fixed disc."""

import numpy as np

from rggconn.analysis import count_components, is_connected, isolated_vertices
from rggconn.knn import build_gilbert, build_knn, longest_edge
from rggconn.points import Region, sample_poisson


def main():
    ps = sample_poisson(Region(0.0, 0.0, 24.0), 1.0, seed=11)
    print(f"{len(ps)} points")

    for k in (1, 2, 4, 6):
        g = build_knn(ps, k)
        degs = g.degrees()
        print(f"knn k={k}: {g.num_edges()} edges, mean degree {degs.mean():.2f}, "
              f"{count_components(g)} components, connected={is_connected(g)}")

    # a disc radius matching the longest k=1 edge kills isolation by construction
    r = longest_edge(build_knn(ps, 1))
    for scale in (0.5, 1.0, 1.5):
        g = build_gilbert(ps, scale * r)
        print(f"gilbert r={scale * r:.3f}: {g.num_edges()} edges, "
              f"{len(isolated_vertices(g))} isolated, connected={is_connected(g)}")


if __name__ == "__main__":
    main()
