"""GRU-based arousal/valence regression on expression-coefficient corpora."""

from .abtest import ab_compare, underrepresented_quadrant
from .data import Corpus, WindowSample, load_corpus, make_windows
from .losses import LossWeights, combined_loss, concordance, pearson, rmse
from .model import GruRegressor
from .train import TrainConfig, TrainResult, evaluate, load_checkpoint, train

__version__ = "0.1.0"
