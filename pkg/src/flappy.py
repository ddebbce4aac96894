"""Side-scrolling flappy-bird simulator on a fixed pixel grid."""

import random
from dataclasses import dataclass

from src.config import FlappyConfig
from src.errors import StepAfterDone
from src.schema import FeatureSchema, FeatureSpec

FLAP = "FLAP"
NO_FLAP = "NO_FLAP"
ACTIONS = (FLAP, NO_FLAP)

FEATURES = (
    "player.y", "player.vel",
    "next.pipe.dist.to.player", "next.pipe.top.y", "next.pipe.bottom.y",
    "next.next.pipe.dist.to.player", "next.next.pipe.top.y",
    "next.next.pipe.bottom.y",
)

# declared ranges of the pipe heights; gaps up to 100 px fit under 292
TOP_RANGE = (0.0, 192.0)
BOTTOM_RANGE = (0.0, 292.0)


def flappy_schema(config=None):
    config = config or FlappyConfig()
    near = (-float(config.pipe_width), float(config.first_pipe_x - config.bird_x))
    far = (near[0] + config.pipe_spacing, near[1] + config.pipe_spacing)
    specs = (
        FeatureSpec("player.y", 0.0, float(config.floor_y)),
        FeatureSpec("player.vel", config.flap_velocity, config.max_velocity),
        FeatureSpec("next.pipe.dist.to.player", *near),
        FeatureSpec("next.pipe.top.y", *TOP_RANGE),
        FeatureSpec("next.pipe.bottom.y", *BOTTOM_RANGE),
        FeatureSpec("next.next.pipe.dist.to.player", *far),
        FeatureSpec("next.next.pipe.top.y", *TOP_RANGE),
        FeatureSpec("next.next.pipe.bottom.y", *BOTTOM_RANGE),
    )
    return FeatureSchema(specs, ACTIONS, 0)


@dataclass
class Pipe:
    x: float
    top: float      # lower edge of the upper pipe
    bottom: float   # upper edge of the lower pipe


@dataclass
class FlappyState:
    y: float
    vel: float
    pipes: list


class Flappy:
    actions = ACTIONS

    def __init__(self, config=None, max_frames=3600):
        self.config = config or FlappyConfig()
        self.max_frames = max_frames
        self.schema = flappy_schema(self.config)
        self.rng = random.Random(0)
        self.state = FlappyState(self.config.start_y, 0.0, [])
        self.frames = 0
        self.done = True

    def _new_pipe(self, x):
        c = self.config
        top = float(self.rng.randint(c.pipe_top_min, c.pipe_top_max))
        return Pipe(float(x), top, min(top + c.gap, float(c.floor_y)))

    def reset(self, seed):
        c = self.config
        self.rng = random.Random(seed)
        pipes = [self._new_pipe(c.first_pipe_x + i * c.pipe_spacing) for i in range(3)]
        self.state = FlappyState(float(c.start_y), 0.0, pipes)
        self.frames = 0
        self.done = False
        return self.observe()

    def _upcoming(self):
        # pipes whose right edge is still ahead of the bird's left edge
        bird_x = self.config.bird_x
        ahead = [p for p in self.state.pipes if p.x + self.config.pipe_width > bird_x]
        return ahead[0], ahead[1]

    def observe(self):
        s = self.state
        near, far = self._upcoming()
        bx = self.config.bird_x
        return (
            s.y, s.vel,
            near.x - bx, near.top, near.bottom,
            far.x - bx, far.top, far.bottom,
        )

    def _collides(self):
        c = self.config
        y0, y1 = self.state.y, self.state.y + c.bird_size
        if y1 >= c.floor_y:
            return True
        x0, x1 = c.bird_x, c.bird_x + c.bird_size
        for p in self.state.pipes:
            if x1 > p.x and x0 < p.x + c.pipe_width:
                if y0 < p.top or y1 > p.bottom:
                    return True
        return False

    def step(self, action):
        if self.done:
            raise StepAfterDone("episode is over; call reset()")
        c, s = self.config, self.state
        if action == FLAP:
            s.vel = c.flap_velocity
        else:
            s.vel = min(s.vel + c.gravity, c.max_velocity)
        # the ceiling stops the bird without ending the episode
        s.y = max(0.0, s.y + s.vel)

        for p in s.pipes:
            p.x -= c.scroll
        s.pipes = [p for p in s.pipes if p.x + c.pipe_width > 0]
        while len(s.pipes) < 3:
            s.pipes.append(self._new_pipe(s.pipes[-1].x + c.pipe_spacing))

        self.frames += 1
        crashed = self._collides()
        if crashed:
            s.y = min(s.y, float(c.floor_y - c.bird_size))
        self.done = crashed or self.frames >= self.max_frames
        return self.observe(), (0.0 if crashed else 1.0), self.done
