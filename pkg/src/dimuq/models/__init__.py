"""Point-estimate regressor families."""

from .boosting import GbtConfig, GradientBoostingRegressor
from .forest import ForestConfig, RandomForestRegressor
from .mlp import MlpConfig, MlpRegressor
from .neighbors import KnnConfig, KnnRegressor
from .svr import SvrConfig, SvrRegressor
from .tree import DecisionTreeRegressor, TreeConfig

__all__ = [
    "KnnConfig", "KnnRegressor",
    "TreeConfig", "DecisionTreeRegressor",
    "ForestConfig", "RandomForestRegressor",
    "GbtConfig", "GradientBoostingRegressor",
    "SvrConfig", "SvrRegressor",
    "MlpConfig", "MlpRegressor",
]
