"""Echo state networks for long-time statistics of a thermoacoustic model.

The package couples a time-delayed Galerkin model of a Rijke tube
(`galerkin`) with reservoir-computing predictors: a conventional echo state
network (`reservoir`) and a hybrid variant that feeds a reduced-order model
forecast alongside the data (`hybrid`). The `evaluation` module measures how
well closed-loop free runs reproduce the attractor's time-averaged acoustic
energy, `config`/`cli` wrap everything into a reproducible experiment
harness, and `checkpoint`/`series`/`figures`/`svgplot` handle artifact I/O.
"""

from .errors import (
    ConfigError,
    DimensionMismatchError,
    EmptyWindowError,
    InsufficientDataError,
    InvalidArgumentError,
    MissingFileError,
    NumericalBlowupError,
    SingularSystemError,
    SpectralRadiusError,
    ThermoesnError,
    UntrainedReadoutError,
    ValidationFailedError,
    ZeroReferenceError,
)
from .galerkin import (
    DelayHistory,
    ModelParams,
    Stepper,
    acoustic_energy,
    flame_velocity,
    lyapunov_leading,
    simulate,
)
from .series import TimeSeries, read_state_csv, write_state_csv
from .reservoir import (
    EsnConfig,
    Reservoir,
    TrainDiagnostics,
    init_reservoir,
    predict_closed_loop,
    train_esn,
)
from .hybrid import (
    HybridEsn,
    ValidationRecord,
    hesn_predict,
    hesn_train,
    hesn_train_validated,
)
from .evaluation import (
    Dataset,
    EvalReport,
    ExperimentSetup,
    TrainerOptions,
    build_dataset,
    evaluate_esn_ensemble,
    evaluate_hesn_ensemble,
    evaluate_rom,
    grid_search,
    ng_sweep,
    relative_error,
    time_average,
)
from .config import ExperimentConfig, parse_config
from .checkpoint import load_checkpoint, save_checkpoint
from .version import VERSION

__version__ = VERSION

__all__ = [
    "ConfigError",
    "DimensionMismatchError",
    "EmptyWindowError",
    "InsufficientDataError",
    "InvalidArgumentError",
    "MissingFileError",
    "NumericalBlowupError",
    "SingularSystemError",
    "SpectralRadiusError",
    "ThermoesnError",
    "UntrainedReadoutError",
    "ValidationFailedError",
    "ZeroReferenceError",
    "DelayHistory",
    "ModelParams",
    "Stepper",
    "acoustic_energy",
    "flame_velocity",
    "lyapunov_leading",
    "simulate",
    "TimeSeries",
    "read_state_csv",
    "write_state_csv",
    "EsnConfig",
    "Reservoir",
    "TrainDiagnostics",
    "init_reservoir",
    "predict_closed_loop",
    "train_esn",
    "HybridEsn",
    "ValidationRecord",
    "hesn_predict",
    "hesn_train",
    "hesn_train_validated",
    "Dataset",
    "EvalReport",
    "ExperimentSetup",
    "TrainerOptions",
    "build_dataset",
    "evaluate_esn_ensemble",
    "evaluate_hesn_ensemble",
    "evaluate_rom",
    "grid_search",
    "ng_sweep",
    "relative_error",
    "time_average",
    "ExperimentConfig",
    "parse_config",
    "load_checkpoint",
    "save_checkpoint",
    "VERSION",
    "__version__",
]
