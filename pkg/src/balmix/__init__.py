"""balmix: imbalance-aware classifier training at desk scale.

Power-law class sampling, balanced feature/label mixing, focal and
effective-number losses, ordinal evaluation metrics, synthetic long-tailed
datasets, and a reproducible experiment harness with a CLI.
"""
from .histogram import ClassHistogram, from_labels, imbalance_ratio
from .sampling import IndexSampler, SamplingStrategy, class_probabilities, make_sampler
from .mixing import (
    Example,
    MixedExample,
    MixupConfig,
    balanced_mixup_batch,
    draw_lambda_balanced,
    draw_lambda_classic,
    mix,
    mix_arrays,
)
from .losses import (
    Loss,
    LossConfig,
    LossValue,
    class_balanced_loss,
    class_balanced_weights,
    cross_entropy_soft,
    focal_loss,
    make_loss,
    softmax,
)
from .metrics import (
    ConfusionMatrix,
    DegenerateMetricWarning,
    PredictionSet,
    balanced_accuracy,
    evaluate_metric,
    kendall_tau,
    macro_f1,
    mcc,
    quad_kappa,
)
from .model import (
    Architecture,
    Checkpoint,
    Classifier,
    TrainConfig,
    TrainingDivergedError,
    cosine_lr,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .synthdata import (
    Dataset,
    FoldPlan,
    SyntheticSpec,
    generate,
    load_csv,
    save_csv,
    stratified_holdout,
    stratified_kfold,
)
from .harness import (
    DatasetConfig,
    ExperimentConfig,
    MethodConfig,
    ModelConfig,
    ProtocolConfig,
    ResultRecord,
    TrainSettings,
    read_records,
    report,
    run,
    sweep_alpha,
    write_records,
)

__version__ = "0.1.0"
