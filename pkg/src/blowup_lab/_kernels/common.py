# Layout of the per-step sample rows written by ``advance``.
COLUMNS = ("t", "M", "ut_R", "min_ur", "min_J2", "min_J3", "dt", "min_u", "min_ut", "max_u")

STATUS_CHUNK = 0  # max_steps taken without any other event
STATUS_LEVEL = 1  # max u crossed the requested snapshot level
STATUS_USTOP = 2  # max u reached u_stop
STATUS_UNDERFLOW = 3  # step size fell below DT_MIN
STATUS_PAUSE = 4  # t reached t_pause
STATUS_NONFINITE = 5  # NaN/inf appeared in the state or its rhs

DT_MIN = 1e-16
