#: Errors
TAU_MISMATCH = "Matches were computed at tau={matches_tau}, but LRP was requested at tau={tau}."  # noqa: E501
