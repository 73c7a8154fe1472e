from .loss import loss
from .metrics import IDENTICAL, MS_SSIM_WEIGHTS, FrameMetrics, evaluate, ms_ssim, psnr
from .ssim import constant_ssim, gaussian_window, ssim, ssim_value
