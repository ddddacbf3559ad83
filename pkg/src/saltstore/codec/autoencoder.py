"""Frozen convolutional feature extractor and a trainable linear autoencoder.

The extractor is a two-layer stack of 3x3, stride-2, zero-bias convolutions
(1 -> 8 -> 16 channels) with rectifiers, mean-pooled to a 16-dimension
vector.  Its kernels come from a fixed seed and are never updated.

The autoencoder is linear.  For frame ``t`` of a clip the encoder input is
``[features_t, code_{t-1}, motion_t]`` (zeros stand in for the previous
code and the motion at ``t = 1``); ``code_t = x_t @ encoder`` and the
reconstruction is ``code_t @ decoder``, compared against the frame scaled to
[0, 1].  Because ``code_{t-1}`` feeds the next step the gradient is
back-propagated through time.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import InvalidInputError, TrainingDivergedError
from .motion import estimate_motion

EXTRACTOR_SEED = 0x5A17
FEATURE_DIM = 16
_CHANNELS = (1, 8, FEATURE_DIM)


def _readonly(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ConvExtractor:
    kernels: tuple

    @classmethod
    def from_seed(cls, seed=EXTRACTOR_SEED):
        rng = np.random.default_rng(seed)
        kernels = []
        for cin, cout in zip(_CHANNELS, _CHANNELS[1:]):
            std = np.sqrt(2.0 / (cin * 9))
            kernels.append(_readonly(rng.normal(0.0, std, size=(cout, cin, 3, 3))))
        return cls(tuple(kernels))


def _conv_s2(x, w):
    """3x3 stride-2 convolution with one pixel of zero padding."""
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    win = sliding_window_view(xp, (3, 3), axis=(1, 2))[:, ::2, ::2]
    return np.einsum("chwij,mcij->mhw", win, w, optimize=True)


def extract_features(frame, weights=None):
    """Forward ``frame`` through the frozen extractor; returns 16 floats."""
    ext = getattr(weights, "extractor", weights) or default_extractor()
    h, w = frame.shape
    if h % 4 or w % 4:
        raise InvalidInputError(f"frame {w}x{h} is not a multiple of the extractor stride (4)")
    x = frame.samples.astype(np.float64)[None] / 255.0
    for k in ext.kernels:
        x = np.maximum(_conv_s2(x, k), 0.0)
    return x.mean(axis=(1, 2))


_DEFAULT = None


def default_extractor():
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = ConvExtractor.from_seed()
    return _DEFAULT


@dataclass(frozen=True, eq=False)
class AutoencoderWeights:
    encoder: np.ndarray          # (d_in, d_code)
    decoder: np.ndarray          # (d_code, d_out)
    extractor: ConvExtractor
    lr: float = 0.0
    epochs: int = 0
    block_size: int = 8
    search_radius: int = 7
    loss_trace: tuple = field(default=())

    def __post_init__(self):
        e, d = np.asarray(self.encoder), np.asarray(self.decoder)
        if e.ndim != 2 or d.ndim != 2 or e.shape[1] != d.shape[0]:
            raise InvalidInputError("encoder/decoder dimensions are incompatible")
        object.__setattr__(self, "encoder", _readonly(e))
        object.__setattr__(self, "decoder", _readonly(d))

    @property
    def code_dim(self):
        return self.encoder.shape[1]


@dataclass
class _ClipInputs:
    features: np.ndarray   # (T, 16)
    motion: np.ndarray     # (T, 2 * blocks); row 0 is zero
    targets: np.ndarray    # (T, pixels)


def prepare_clip(frames, extractor, block_size=8, search_radius=7):
    """Precompute the frozen parts of the stacked input for one clip."""
    frames = list(frames)
    if not frames:
        raise InvalidInputError("clip is empty")
    h, w = frames[0].shape
    nblocks = (h // block_size) * (w // block_size)
    feats = np.stack([extract_features(f, extractor) for f in frames])
    motion = np.zeros((len(frames), 2 * nblocks))
    for t in range(1, len(frames)):
        mv = estimate_motion(frames[t - 1], frames[t], block_size, search_radius)
        motion[t] = mv.vectors.ravel() / max(search_radius, 1)
    targets = np.stack([f.samples.ravel() / 255.0 for f in frames])
    return _ClipInputs(feats, motion, targets)


def _forward(enc, dec, clip):
    d_code = enc.shape[1]
    prev = np.zeros(d_code)
    xs, codes, recons = [], [], []
    for t in range(clip.targets.shape[0]):
        x = np.concatenate((clip.features[t], prev, clip.motion[t]))
        c = x @ enc
        xs.append(x)
        codes.append(c)
        recons.append(c @ dec)
        prev = c
    return xs, codes, recons


def clip_loss_and_grad(enc, dec, clip):
    """Loss ``sum_t ||F_t - F^_t||^2`` and its gradients w.r.t. both matrices."""
    xs, codes, recons = _forward(enc, dec, clip)
    nfeat = clip.features.shape[1]
    d_code = enc.shape[1]
    g_enc = np.zeros_like(enc)
    g_dec = np.zeros_like(dec)
    loss = 0.0
    carry = np.zeros(d_code)          # dL/dcode_t arriving from step t+1
    for t in range(len(xs) - 1, -1, -1):
        err = recons[t] - clip.targets[t]
        loss += float(err @ err)
        g_out = 2.0 * err
        g_dec += np.outer(codes[t], g_out)
        g_code = dec @ g_out + carry
        g_enc += np.outer(xs[t], g_code)
        carry = (enc @ g_code)[nfeat:nfeat + d_code]
    return loss, g_enc, g_dec


def loss_and_grad(weights, clips):
    """Total loss and gradients over prepared clips (see :func:`prepare_clip`)."""
    total = 0.0
    g_enc = np.zeros_like(weights.encoder)
    g_dec = np.zeros_like(weights.decoder)
    for clip in clips:
        loss, ge, gd = clip_loss_and_grad(weights.encoder, weights.decoder, clip)
        total += loss
        g_enc += ge
        g_dec += gd
    return total, g_enc, g_dec


def init_weights(clips, code_dim, seed, extractor=None, block_size=8, search_radius=7):
    extractor = extractor or default_extractor()
    first = clips[0][0]
    h, w = first.shape
    nblocks = (h // block_size) * (w // block_size)
    d_in = FEATURE_DIM + code_dim + 2 * nblocks
    d_out = h * w
    rng = np.random.default_rng(seed)
    enc = rng.normal(0.0, 0.1 / np.sqrt(d_in), size=(d_in, code_dim))
    dec = rng.normal(0.0, 0.1 / np.sqrt(code_dim), size=(code_dim, d_out))
    return AutoencoderWeights(enc, dec, extractor, block_size=block_size,
                              search_radius=search_radius)


def train_autoencoder(clips, epochs, lr, seed, code_dim=8, extractor=None):
    """Per-clip gradient descent on the autoencoder; the extractor stays frozen.

    Returns weights whose ``loss_trace`` holds the summed loss of each epoch.
    """
    clips = [list(c) for c in clips]
    if not clips or any(not c for c in clips):
        raise InvalidInputError("training needs at least one non-empty clip")
    if not lr >= 0 or not np.isfinite(lr):
        raise InvalidInputError("learning rate must be a non-negative finite number")
    w0 = init_weights(clips, code_dim, seed, extractor)
    prepared = [prepare_clip(c, w0.extractor, w0.block_size, w0.search_radius) for c in clips]
    enc = np.array(w0.encoder)
    dec = np.array(w0.decoder)
    trace = []
    for epoch in range(1, epochs + 1):
        epoch_loss = 0.0
        for clip in prepared:
            # overflow shows up as a non-finite loss, reported below
            with np.errstate(over="ignore", invalid="ignore"):
                loss, ge, gd = clip_loss_and_grad(enc, dec, clip)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch)
            epoch_loss += loss
            if lr:
                enc -= lr * ge
                dec -= lr * gd
        if not np.isfinite(epoch_loss):
            raise TrainingDivergedError(epoch)
        trace.append(epoch_loss)
    return replace(w0, encoder=enc, decoder=dec, lr=lr, epochs=epochs,
                   loss_trace=tuple(trace))


def reconstruct_clip(frames, weights):
    """Decode every frame of ``frames`` through the autoencoder; floats in [0, 1] scale."""
    clip = prepare_clip(frames, weights.extractor, weights.block_size, weights.search_radius)
    _, _, recons = _forward(weights.encoder, weights.decoder, clip)
    h, w = frames[0].shape
    return [r.reshape(h, w) for r in recons]
