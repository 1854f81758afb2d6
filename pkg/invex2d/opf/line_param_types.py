LINE_PARAM_TYPE = {
    "g": "float",  # conductance, p.u.
    "b": "float",  # susceptance, p.u.
    "w": "float",  # squared voltage magnitude at bus 1, p.u.^2
    "s_u": "float",  # apparent power limit, p.u.
    "c1": "float",  # cost of generation at bus 1
    "c2": "float",  # cost of generation at bus 2
    "p1_lo": "float",  # p.u., demand folded in
    "p1_hi": "float",
    "q1_lo": "float",
    "q1_hi": "float",
    "p2_lo": "float",
    "p2_hi": "float",
    "q2_lo": "float",
    "q2_hi": "float",
    "v_lo": "float",  # bus 2 voltage magnitude, p.u.
    "v_hi": "float",
    "theta_lo": "float",  # rad
    "theta_hi": "float",  # rad
}

# extra spellings accepted on the command line
LINE_PARAM_FLAG_ALIASES = {
    "s_u": "--su",
}
