"""Field-dependent PSF regression toolkit.

Thin wrapper over the compiled core: synthetic aberrated-lens datasets, the
(dz, R, phi) -> PSF feed-forward network, Eq.-style metrics and spatially
variant convolution rendering.
"""

from ._core import (  # noqa: F401
    AllZeroGridError,
    BadMagicError,
    BadVersionError,
    BehindFocalPlaneError,
    DefocusMap,
    DimensionMismatchError,
    EvalSummary,
    FieldMapping,
    FieldPoint,
    HiddenActivation,
    Image,
    InsufficientDataError,
    MlpModel,
    NonFiniteLossError,
    OutputActivation,
    PitchMismatchError,
    PsfDataset,
    PsfGrid,
    SamplingGrid,
    SweepReport,
    SweepRow,
    SynthLensSpec,
    TrainConfig,
    TrainReport,
    TruncatedFileError,
    UpsampleNotSupportedError,
    center_and_crop,
    centroid,
    checkerboard,
    convolve_spatially_variant,
    defocus_from_depth,
    eq2_distance,
    evaluate,
    flatten,
    forward,
    generate_dataset,
    linear_depth_gradient,
    load_dataset,
    load_model,
    load_pgm,
    loss,
    normalize_volume,
    per_pixel_rmse,
    pixel_to_field,
    resample,
    save_dataset,
    save_model,
    save_pgm,
    sweep,
    synth_psf,
    train,
    unflatten,
)

__version__ = "0.1.0"
