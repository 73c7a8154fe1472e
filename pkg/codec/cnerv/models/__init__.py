from .cnerv import CNeRV, blockwise_decode, cnerv_forward
from .nerv import NeRV, nerv_forward
from .params import ModelParams, init, match_param_budget, nerv_baseline, param_count, param_shapes
