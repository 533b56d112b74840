from .features import (
    FeatureDefinition,
    FeatureSpec,
    FeatureValue,
    FeatureVector,
    MissingData,
    build_feature_vector,
    expand_keywords,
    load_feature_specs,
    parse_specs,
)
from .series import DemandSeries, IndicatorSeries, PlanSeries, read_demand, read_indicators, read_plan, read_working_days
from .svr import DegenerateInput, ForecastModel, SVRSchedule, epsilon_loss, train_svr
from .uncertainty import EmptyResidualPool, Prediction, empirical_quantile, predict_with_uncertainty
from .validation import InsufficientHistory, NestedCVResult, OuterFold, nested_cv
