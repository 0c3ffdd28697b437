"""From-scratch dense/LSTM layers, reverse-mode gradients and optimizers."""
from .dense import MLP, DenseTape, ShapeError, StaleTapeError, dense_backward, dense_forward, init_mlp
from .lstm import LstmCell, LstmTape, init_lstm, lstm_backward, lstm_forward, sigmoid
from .optim import AdamState, adam_step, gd_step
from .snapshot import load_arrays, save_arrays

__all__ = [
    "MLP", "DenseTape", "ShapeError", "StaleTapeError", "dense_backward", "dense_forward",
    "init_mlp", "LstmCell", "LstmTape", "init_lstm", "lstm_backward", "lstm_forward",
    "sigmoid", "AdamState", "adam_step", "gd_step", "load_arrays", "save_arrays",
]
