"""Cart-pole balancing simulator.

Classic cart-pole dynamics integrated with an explicit Euler step. The track
axis points LEFT: the LEFT action applies +force_mag and a positive
angle.of.pole means the pole leans toward the LEFT end of the track.
"""

import math
import random
from dataclasses import dataclass

from src.config import CartPoleConfig
from src.errors import StepAfterDone
from src.schema import FeatureSchema, FeatureSpec

LEFT = "LEFT"
RIGHT = "RIGHT"
ACTIONS = (LEFT, RIGHT)

FEATURES = ("position.of.cart", "velocity.of.cart", "angle.of.pole",
            "rotation.rate.of.pole")


def cartpole_schema(config=None):
    config = config or CartPoleConfig()
    angle = math.radians(config.angle_limit_deg)
    specs = (
        FeatureSpec("position.of.cart", -config.position_limit, config.position_limit),
        FeatureSpec("velocity.of.cart", -3.0, 3.0),
        FeatureSpec("angle.of.pole", -round(angle, 4), round(angle, 4)),
        FeatureSpec("rotation.rate.of.pole", -3.5, 3.5),
    )
    return FeatureSchema(specs, ACTIONS, 0)


@dataclass(frozen=True)
class CartPoleState:
    position: float = 0.0
    velocity: float = 0.0
    angle: float = 0.0
    rotation_rate: float = 0.0

    def as_vector(self):
        return (self.position, self.velocity, self.angle, self.rotation_rate)


def is_alive(state, config):
    return (abs(state.angle) <= math.radians(config.angle_limit_deg)
            and abs(state.position) <= config.position_limit)


def cartpole_step(state, action, config):
    """One Euler step; returns (state, reward, failed)."""
    force = config.force_mag if action == LEFT else -config.force_mag
    total_mass = config.cart_mass + config.pole_mass
    pole_moment = config.pole_mass * config.half_length

    cos_a, sin_a = math.cos(state.angle), math.sin(state.angle)
    temp = (force + pole_moment * state.rotation_rate ** 2 * sin_a) / total_mass
    angle_acc = (config.gravity * sin_a - cos_a * temp) / (
        config.half_length
        * (4.0 / 3.0 - config.pole_mass * cos_a ** 2 / total_mass))
    acc = temp - pole_moment * angle_acc * cos_a / total_mass

    tau = config.tau
    nxt = CartPoleState(
        position=state.position + tau * state.velocity,
        velocity=state.velocity + tau * acc,
        angle=state.angle + tau * state.rotation_rate,
        rotation_rate=state.rotation_rate + tau * angle_acc,
    )
    failed = not is_alive(nxt, config)
    return nxt, (0.0 if failed else 1.0), failed


class CartPole:
    actions = ACTIONS

    def __init__(self, config=None, max_frames=200):
        self.config = config or CartPoleConfig()
        self.max_frames = max_frames
        self.schema = cartpole_schema(self.config)
        self.state = CartPoleState()
        self.frames = 0
        self.done = True

    def reset(self, seed):
        rng = random.Random(seed)
        r = self.config.init_range
        self.state = CartPoleState(*(rng.uniform(-r, r) for _ in range(4)))
        self.frames = 0
        self.done = False
        return self.observe()

    def set_state(self, state):
        self.state = state
        self.done = not is_alive(state, self.config)

    def observe(self):
        return self.state.as_vector()

    def step(self, action):
        if self.done:
            raise StepAfterDone("episode is over; call reset()")
        self.state, reward, failed = cartpole_step(self.state, action, self.config)
        self.frames += 1
        self.done = failed or self.frames >= self.max_frames
        return self.observe(), reward, self.done
