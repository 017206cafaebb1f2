"""Hunting obstruction events in analysis boxes.

Samples a box at a small scale where confined components still appear,
then inspects one witness: its tile occupancy, hexagonal hull, and the
reflected-cap emptiness that the theory guarantees.
"""

import math

from rggconn.knn import build_knn
from rggconn.local_events import (
    confined_components,
    confined_dense_tiles,
    hex_hull,
    make_box,
    reflected_cap_empty,
    sample_box,
)
from rggconn.rng import derive_key


def main():
    box = make_box(math.e ** 3, 15)
    print(f"box side {box.side:.2f} at log n = 3, mean population {box.side ** 2:.0f}")

    k = 2
    found = 0
    for seed in range(40):
        ps = sample_box(box, derive_key(99, seed))
        if len(ps) <= k:
            continue
        g = build_knn(ps, k)
        for members in confined_components(ps, k, g):
            found += 1
            if found > 3:
                continue
            hull = hex_hull(ps.xy[members])
            event = confined_dense_tiles(ps, box, k, N=1, eta=0.5)
            print(f"seed {seed}: component of {len(members)} points, "
                  f"hull perimeter {sum(hull.edge_length(i) for i in range(6)):.2f}, "
                  f"max tile count {event.max_tile_count}, "
                  f"cap empty={reflected_cap_empty(ps, members, g)}")
    print(f"{found} confined components in 40 boxes at k={k}")


if __name__ == "__main__":
    main()
