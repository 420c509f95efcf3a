# sis/__init__.py
from .checkpoint import load_checkpoint, save_checkpoint
from .config import SisConfig
from .gradients import Batch, batch_loss, gradients, value_and_gradients
from .losses import LossTerms, loss_fuse, loss_pred, loss_sam, loss_sor, loss_terms, loss_total, replicate_truth
from .masks import SensorMask
from .model import (
    extract_features,
    forward,
    fuse_batch,
    fuse_prediction,
    fusion_coefficients,
    mix_sensors,
    predict,
    regress_positions,
    select_head,
)
from .optimizer import AdamState, adam_step, adam_update, project_sample_weights
from .params import Scaler, SensorContext, SisParams, init_params, params_from_tensors, zero_params

__all__ = [
    'SisConfig', 'SisParams', 'SensorContext', 'Scaler', 'SensorMask', 'Batch', 'LossTerms', 'AdamState',
    'init_params', 'zero_params', 'params_from_tensors',
    'extract_features', 'regress_positions', 'fuse_prediction', 'fuse_batch', 'fusion_coefficients',
    'mix_sensors', 'select_head', 'forward', 'predict',
    'loss_pred', 'loss_sor', 'loss_sam', 'loss_fuse', 'loss_terms', 'loss_total', 'replicate_truth',
    'gradients', 'value_and_gradients', 'batch_loss',
    'adam_update', 'adam_step', 'project_sample_weights',
    'save_checkpoint', 'load_checkpoint',
]
