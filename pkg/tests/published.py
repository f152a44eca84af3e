"""Look-up tables as printed for q = 256, M = 16, loss rates 0.10..0.20."""

TABLE1_HOPS = tuple(range(2, 21))
TABLE1 = (
    (16, 17, 17, 18, 18, 18, 18, 19, 19, 19, 19, 19, 19, 19, 19, 19, 19, 20, 20),
    (17, 17, 18, 18, 18, 19, 19, 19, 19, 19, 19, 19, 20, 20, 20, 20, 20, 20, 20),
    (17, 17, 18, 18, 19, 19, 19, 19, 19, 19, 20, 20, 20, 20, 20, 20, 20, 20, 20),
    (17, 18, 18, 19, 19, 19, 19, 19, 20, 20, 20, 20, 20, 20, 20, 20, 20, 21, 21),
    (17, 18, 18, 19, 19, 19, 20, 20, 20, 20, 20, 20, 20, 21, 21, 21, 21, 21, 21),
    (17, 18, 19, 19, 19, 20, 20, 20, 20, 20, 21, 21, 21, 21, 21, 21, 21, 21, 21),
    (17, 18, 19, 19, 20, 20, 20, 20, 21, 21, 21, 21, 21, 21, 21, 21, 22, 22, 22),
    (17, 18, 19, 20, 20, 20, 20, 21, 21, 21, 21, 21, 21, 22, 22, 22, 22, 22, 22),
    (18, 19, 19, 20, 20, 21, 21, 21, 21, 21, 22, 22, 22, 22, 22, 22, 22, 22, 22),
    (18, 19, 20, 20, 21, 21, 21, 21, 22, 22, 22, 22, 22, 22, 22, 22, 23, 23, 23),
    (18, 19, 20, 20, 21, 21, 21, 22, 22, 22, 22, 22, 23, 23, 23, 23, 23, 23, 23),
)

TABLE2_HOPS = (2, 4, 7, 11, 16, 20)
TABLE2 = (
    (16, 17, 18, 19, 19, 20),
    (17, 18, 19, 19, 20, 20),
    (17, 18, 19, 19, 20, 20),
    (17, 18, 19, 20, 20, 21),
    (17, 18, 19, 20, 21, 21),
    (17, 19, 20, 20, 21, 21),
    (17, 19, 20, 21, 21, 22),
    (17, 19, 20, 21, 22, 22),
    (18, 19, 21, 21, 22, 22),
    (18, 20, 21, 22, 22, 23),
    (18, 20, 21, 22, 23, 23),
)
