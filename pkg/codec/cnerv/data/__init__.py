from .frames import FrameDataset, FrameRecord, dataset_digest, load_frames, preprocess, to_uint8, write_frames
from .synth import synth_toy_video
