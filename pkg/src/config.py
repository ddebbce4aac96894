import dataclasses
import hashlib
import json
import typing
from dataclasses import dataclass, field

import yaml

from src.errors import ConfigError, InvalidParams

DOMAINS = ("cartpole", "flappy", "timeseries", "table", "heart_failure")


@dataclass
class EvoParams:
    population_size: int = 100
    generations: int = 100
    tournament_size: int = 2
    elitism_count: int = 1
    mutation_rate: float = 0.9          # probability of one mutation per offspring
    crossover_probability: float = 0.9
    max_rules: int = 50
    max_conditions: int = 10
    initial_rules: int = 5              # rule cap for random initial genomes
    initial_conditions: int = 3
    max_lag: int = 0
    use_certainty: bool = False         # generate action certainties (hard_max)
    selection_objective: int = 0
    seed: int = 0
    workers: int = 1

    def validate(self):
        if self.population_size < 2:
            raise InvalidParams("population_size must be >= 2")
        if not 0 <= self.elitism_count < self.population_size:
            raise InvalidParams("elitism_count must be in [0, population_size)")
        if self.tournament_size < 1:
            raise InvalidParams("tournament_size must be >= 1")
        if self.max_rules < 1 or self.max_conditions < 1:
            raise InvalidParams("max_rules and max_conditions must be >= 1")
        if self.generations < 0:
            raise InvalidParams("generations must be >= 0")
        for name in ("mutation_rate", "crossover_probability"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidParams(f"{name} must be in [0, 1]")
        return self


@dataclass
class EpisodeSpec:
    episodes: int = 5
    max_frames: int = 200
    seed: int = 0
    action_mode: str = "first_match"

    def __post_init__(self):
        if self.episodes < 1:
            raise InvalidParams("episodes must be >= 1")


@dataclass
class CartPoleConfig:
    gravity: float = 9.8
    cart_mass: float = 1.0
    pole_mass: float = 0.1
    half_length: float = 0.5
    force_mag: float = 10.0
    tau: float = 0.02                   # seconds per Euler step
    angle_limit_deg: float = 12.0
    position_limit: float = 2.4
    init_range: float = 0.05            # initial state components ~ U[-r, r]


@dataclass
class FlappyConfig:
    width: int = 288
    height: int = 512
    floor_y: int = 404                  # ground line; reaching it ends the episode
    gravity: float = 1.0                # px / frame^2
    flap_velocity: float = -8.0
    max_velocity: float = 10.0
    scroll: float = 4.0                 # px / frame
    gap: int = 60
    pipe_top_min: int = 20
    pipe_top_max: int = 192
    pipe_width: int = 52
    pipe_spacing: int = 144
    first_pipe_x: int = 288
    bird_x: int = 57
    bird_size: int = 20
    start_y: float = 200.0


@dataclass
class EnvConfig:
    episodes: int = 5                   # training episodes per candidate
    max_frames: int = 200
    validation_episodes: int = 100
    validation_seed: int = 20_000
    action_mode: str = "first_match"
    cartpole: CartPoleConfig = field(default_factory=CartPoleConfig)
    flappy: FlappyConfig = field(default_factory=FlappyConfig)


@dataclass
class WindowSpec:
    window_len: int = 10                # frames per aggregate bucket
    stats: tuple = ("Mean", "Std", "Skew", "Kurtosis")
    max_lag: int = 10
    horizon: int = 30                   # alpha: frames until prediction window
    horizon_len: int = 10               # beta: frames in prediction window

    def __post_init__(self):
        self.stats = tuple(self.stats)
        if self.window_len < 1 or self.max_lag < 0:
            raise ConfigError("window_len must be >= 1 and max_lag >= 0", key="window_len")
        if self.horizon < 1 or self.horizon_len < 1:
            raise ConfigError("horizon and horizon_len must be >= 1", key="horizon")


@dataclass
class MapSeriesConfig:
    base_mmHg: float = 80.0
    drift_sd: float = 0.6
    noise_sd: float = 3.0
    episode_rate: float = 0.004         # hypotension onsets per frame
    episode_depth: float = 35.0
    length: int = 20_000
    seed: int = 0


@dataclass
class ScoreSpec:
    kind: str = "accuracy"              # accuracy | weighted_error
    # label -> {predicted label -> cost}; missing entries cost 1 off-diagonal
    class_weights: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("accuracy", "weighted_error"):
            raise ConfigError(f"unknown scoring kind: {self.kind}", key="kind")
        costs = [c for row in self.class_weights.values() for c in row.values()]
        if any(c < 0 for c in costs):
            raise ConfigError("class weights must be nonnegative",
                              key="class_weights")
        if costs and not any(c > 0 for c in costs):
            raise ConfigError("at least one class weight must be positive",
                              key="class_weights")


@dataclass
class DataConfig:
    csv: str = ""
    label: str = ""
    normalize: bool = False
    split: tuple = (0.6, 0.2, 0.2)
    series: MapSeriesConfig = field(default_factory=MapSeriesConfig)
    window: WindowSpec = field(default_factory=WindowSpec)
    synthetic_rows: int = 299           # heart_failure stand-in table when csv is empty


@dataclass
class EspConfig:
    enabled: bool = False
    k: int = 5
    horizon: int = 20                   # cart-pole outcome: frames survived in next H
    rollout: str = "prescriptor"        # after the first action: prescriptor | hold
    paired: bool = False                # record every action at each visited context
    stride: int = 1                     # frames between contexts, drawn from 1..stride
    samples: int = 100
    prescriptors: int = 10
    outcome: str = "DEATH_EVENT"
    direction: str = "minimize"
    holdout: float = 0.3
    # action -> {"feature": name, "level": treated value (normalized)}
    interventions: dict = field(default_factory=dict)
    # context column -> distance weight for the tabular predictor
    feature_weights: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rollout not in ("prescriptor", "hold"):
            raise ConfigError(f"unknown rollout: {self.rollout}", key="rollout")
        if self.stride < 1:
            raise ConfigError("stride must be >= 1", key="stride")


@dataclass
class ExperimentConfig:
    domain: str = "cartpole"
    seed: int = 0
    schema: str = ""
    data: DataConfig = field(default_factory=DataConfig)
    env: EnvConfig = field(default_factory=EnvConfig)
    evolution: EvoParams = field(default_factory=EvoParams)
    esp: EspConfig = field(default_factory=EspConfig)
    scoring: ScoreSpec = field(default_factory=ScoreSpec)
    output_dir: str = "runs"

    def to_dict(self):
        return dataclasses.asdict(self)

    @property
    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


REQUIRED_KEYS = ("domain", "seed")


def _build(cls, doc, path):
    if not isinstance(doc, dict):
        raise ConfigError(f"{path or 'config'} must be a mapping", key=path or None)
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in doc.items():
        dotted = f"{path}.{key}" if path else key
        if key not in names:
            raise ConfigError(f"unknown config key: {dotted}", key=dotted)
        kind = hints[key]
        if dataclasses.is_dataclass(kind):
            kwargs[key] = _build(kind, value, dotted)
        elif kind is tuple:
            kwargs[key] = tuple(value)
        elif kind is float and isinstance(value, int):
            kwargs[key] = float(value)
        elif kind in (int, float, str, bool) and not isinstance(value, kind):
            raise ConfigError(f"{dotted} must be {kind.__name__}", key=dotted)
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        if exc.key and path and not exc.key.startswith(path):
            exc.key = f"{path}.{exc.key}"
        raise


def config_from_dict(doc):
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    for key in REQUIRED_KEYS:
        if key not in doc:
            raise ConfigError(f"missing required config key: {key}", key=key)
    config = _build(ExperimentConfig, doc, "")
    if config.domain not in DOMAINS:
        raise ConfigError(f"unknown domain: {config.domain}", key="domain")
    # evolution inherits the run seed unless given explicitly
    if "seed" not in doc.get("evolution", {}):
        config.evolution.seed = config.seed
    try:
        config.evolution.validate()
    except InvalidParams as exc:
        raise ConfigError(str(exc), key="evolution") from None
    return config


def load_config(path):
    # JSON documents are valid YAML, so one loader reads both
    with open(path, "r") as f:
        try:
            doc = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(doc or {})


def cartpole_config(seed=0):
    return ExperimentConfig(
        domain="cartpole",
        seed=seed,
        evolution=EvoParams(population_size=100, generations=20, seed=seed,
                            initial_rules=3, initial_conditions=2),
        env=EnvConfig(episodes=20, max_frames=200),
    )


def cartpole_esp_config(seed=0):
    config = cartpole_config(seed)
    config.evolution.generations = 10
    config.esp = EspConfig(enabled=True, k=5, horizon=50, rollout="hold", paired=True,
                           stride=5, samples=100, prescriptors=10,
                           direction="maximize")
    return config


def flappy_config(seed=0):
    return ExperimentConfig(
        domain="flappy",
        seed=seed,
        evolution=EvoParams(population_size=100, generations=200, seed=seed,
                            initial_rules=3, initial_conditions=3),
        env=EnvConfig(episodes=3, max_frames=3600, validation_episodes=10),
    )


def heart_failure_config(seed=0):
    return ExperimentConfig(
        domain="heart_failure",
        seed=seed,
        schema="data/heart_failure_schema.json",
        data=DataConfig(csv="", normalize=True),
        evolution=EvoParams(population_size=100, generations=100, seed=seed,
                            use_certainty=True, initial_rules=5,
                            initial_conditions=2),
        esp=EspConfig(
            enabled=True,
            k=5,
            outcome="DEATH_EVENT",
            direction="minimize",
            interventions={
                "ejection.fraction": {"feature": "ejection.fraction", "level": 0.70},
                "serum.creatinine": {"feature": "serum.creatinine", "level": 0.06},
            },
            feature_weights={"ejection.fraction": 4.0, "serum.creatinine": 4.0},
        ),
        env=EnvConfig(action_mode="hard_max"),
    )


def timeseries_config(seed=0):
    window = WindowSpec(window_len=10, max_lag=10, horizon=30, horizon_len=10)
    return ExperimentConfig(
        domain="timeseries",
        seed=seed,
        data=DataConfig(series=MapSeriesConfig(seed=seed), window=window),
        evolution=EvoParams(population_size=60, generations=30, seed=seed,
                            max_lag=window.max_lag, initial_rules=5,
                            initial_conditions=2),
        scoring=ScoreSpec(kind="weighted_error",
                          class_weights=default_map_costs()),
    )


def default_map_costs():
    # missing a Low (hypotension) costs twice as much as other errors
    labels = ("Low", "Normal", "High")
    costs = {}
    for truth in labels:
        costs[truth] = {
            pred: (0.0 if pred == truth else 2.0 if truth == "Low" else 1.0)
            for pred in labels
        }
    return costs
