from .line_param_types import LINE_PARAM_FLAG_ALIASES, LINE_PARAM_TYPE
from .model import (
    LineParams,
    OPFInstance,
    build_opf_problem,
    canonical_params,
    line_flows,
    random_params,
)
from .checks import (
    aux_kkt_points,
    check_opf_invex,
    closed_form_threshold,
    min_wr_bound,
    thermal_convexity,
)
