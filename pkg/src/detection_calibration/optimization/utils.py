#: L-BFGS
LBFGS_HISTORY = 10
LBFGS_TOLERANCE = 1e-8
LBFGS_MAX_ITER = 200

#: Strong Wolfe line search
WOLFE_C1 = 1e-4
WOLFE_C2 = 0.9
MAX_LINE_SEARCH = 25
LINE_SEARCH_TOLERANCE = 1e-9

#: Curvature pairs with s.y below this are not stored
CURVATURE_EPS = 1e-10

#: Projected backtracking used when a projected step does not decrease
MAX_BACKTRACKS = 60

#: Golden-section search
GOLDEN_RATIO = (5**0.5 - 1) / 2
GOLDEN_MAX_ITER = 500
