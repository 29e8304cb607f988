"""beanroast: coffee-bean roast degree classification.

Image preprocessing, a 4-class roast classifier, evaluation metrics, a
synthetic dataset generator, and an HTTP prediction service with persisted
history.
"""

from .dataset import (
    CLASS_LABELS,
    DatasetSplit,
    FoldPlan,
    LabeledSample,
    RoastClass,
    SynthConfig,
    load_dataset,
    make_folds,
    split_dataset,
    synthesize_bean_image,
    synthesize_dataset,
)
from .errors import (
    ArtifactError,
    BeanroastError,
    ColorSpaceError,
    CompatibilityError,
    ConfigError,
    DataError,
    LayoutError,
    ShapeError,
    TrainingError,
)
from .imaging import (
    FLOAT01,
    HSV,
    RGB8,
    AugmentConfig,
    BooleanMask,
    PreprocessConfig,
    RasterImage,
    apply_mask,
    augment,
    compute_mask,
    gaussian_blur,
    gaussian_kernel,
    normalize,
    preprocess,
    read_image,
    resize,
    rgb_to_hsv,
    write_image,
)
from .metrics import (
    ConfusionMatrix,
    EvaluationReport,
    confusion_matrix,
    evaluate,
    export_curves,
    metrics_from_confusion,
)
from .model import (
    KFoldResult,
    ModelArtifact,
    Prediction,
    RoastModel,
    TrainingConfig,
    TrainingHistory,
    build_model,
    load_model,
    predict,
    save_model,
    softmax,
    train,
    train_kfold,
)
from .service import HistoryRecord, RecordStore, create_app

__version__ = "0.1.0"
