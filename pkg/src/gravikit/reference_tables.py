"""Published integer data, transcribed entry by entry.

These literals are the reference the topology generators are checked against;
they are deliberately written out instead of being produced by ``topology``.
"""

# intersection matrices of the rank-0 spaces, n = 1..4
INTERSECTION_RANK0 = {
    1: [[-4]],
    2: [[-2, 0],
        [0, -2]],
    3: [[-2, 1, 1],
        [1, -2, 0],
        [1, 0, -2]],
    4: [[-2, 1, 0, 0],
        [1, -2, 1, 1],
        [0, 1, -2, 0],
        [0, 1, 0, -2]],
}

# intersection matrices of the rank-1 spaces, n = 1..4
INTERSECTION_RANK1 = {
    1: [[-4, 4],
        [4, -4]],
    2: [[-2, 0, 0],
        [0, -2, 2],
        [0, 2, -2]],
    3: [[-2, 1, 1, 0],
        [1, -2, 0, 1],
        [1, 0, -2, 1],
        [0, 1, 1, -2]],
    4: [[-2, 1, 0, 0, 0],
        [1, -2, 1, 1, 1],
        [0, 1, -2, 0, 0],
        [0, 1, 0, -2, 0],
        [0, 1, 0, 0, -2]],
}

# (rank, n) -> class label
CLASSIFICATION = {
    **{(0, n): f"ALF-D_{n}" for n in range(0, 41)},
    (1, 0): "ALG*-I*_4", (1, 1): "ALG*-I*_3", (1, 2): "ALG*-I*_2", (1, 3): "ALG*-I*_1",
    (1, 4): "ALG_{1/2}",
    (2, 0): "ALH*-I_8", (2, 1): "ALH*-I_7", (2, 2): "ALH*-I_6", (2, 3): "ALH*-I_5",
    (2, 4): "ALH*-I_4", (2, 5): "ALH*-I_3", (2, 6): "ALH*-I_2", (2, 7): "ALH*-I_1",
    (2, 8): "ALH",
}

# second Betti number offset per rank: b2 = n + offset
B2_OFFSET = {0: 0, 1: 1, 2: 3}

FIXED_POINTS = {0: 1, 1: 2, 2: 4}
