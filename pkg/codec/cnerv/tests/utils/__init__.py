from .fill import create_frame_files, create_state, gradient_error, numeric_gradient
from .rand import random_array, random_codes, random_image, random_shape
