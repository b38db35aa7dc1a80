from .layers import (
    conv2d_backward,
    conv2d_forward,
    cross_entropy,
    dense_backward,
    dense_forward,
    maxpool2_backward,
    maxpool2_forward,
    relu_backward,
    relu_forward,
    softmax,
)
from .model import (
    DEFAULT_LAYERS,
    BadMagicError,
    CnnModel,
    LayerSpec,
    ModelFormatError,
    ShapeMismatchError,
    TruncatedModelError,
    VersionMismatchError,
    load_model,
    save_model,
)
from .optim import AdamState, adam_step
from .train import TrainConfig, TrainHistory, predict, train
