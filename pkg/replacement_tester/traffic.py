# coding: UTF-8
"""Deterministic multi-vehicle traffic on a grid road network.

A traffic context embeds ``n`` driver policies, one per vehicle. Each tick is one synchronous
round: every vehicle observes the previous frame within its radius, every policy decides, then
all moves happen together. A vehicle moving ``v`` cells advances one cell per sub-step for ``v``
sub-steps and then stands still; two vehicles in one cell at one sub-step, or swapping cells
between two sub-steps, collide.

Movement rules
--------------
- The requested speed is clamped to ``[v - a_max, v + a_max] ∩ [0, v_max]``.
- The first move takes the policy's heading; the rest follows the shortest path to the
  destination. An illegal heading holds the vehicle in place.
- When several movers would enter the same first cell, the lowest vehicle index moves and the
  others brake in place.
- A vehicle stops on its destination, stays there for the rest of the tick and is off the
  network from the next tick on.
- The recorded speed is the number of cells moved in the tick.

Scenario file format
--------------------
A YAML header with the horizon, a ``---`` line, then one vehicle per line as
``row,col speed row,col`` (origin, initial speed, destination)::

    horizon: 12
    ---
    2,0 2 2,4
    4,2 2 0,2
"""
import logging
from bisect import bisect_left
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product
from typing import Optional

from .core import Context, Property, Run, Step, Verdict, structured_domain
from .errors import (
    ExplosionGuard, MalformedSpec, NotATrafficRun, PreconditionError)
from .network import HEADINGS, Heading, allowed_headings, legal_move, split_header
from .partition import EquivalenceClassifier
from .seeding import derive_seed


logger = logging.getLogger(__name__)

SCENARIO_GUARD = 10 ** 6


@dataclass(frozen=True)
class VehicleSpec:
    origin: tuple
    speed: int
    destination: tuple


@dataclass(frozen=True)
class DrivingScenario:
    """Input of a traffic experiment: one :class:`VehicleSpec` per vehicle and a horizon."""
    vehicles: tuple
    horizon: int

    @property
    def length(self):
        return len(self.vehicles)

    @classmethod
    def of(cls, vehicles, horizon):
        return cls(tuple(VehicleSpec(tuple(o), int(v), tuple(d)) for o, v, d in vehicles),
                   horizon)


@dataclass(frozen=True)
class VehicleState:
    """One vehicle in one frame; ``path`` lists the cells entered during the tick."""
    position: tuple
    speed: int
    heading: Optional[Heading]
    arrived: bool
    path: tuple = ()


@dataclass(frozen=True)
class TrafficFrame:
    tick: int
    vehicles: tuple


@dataclass(frozen=True)
class VehicleView:
    position: tuple
    speed: int
    heading: Optional[Heading]


@dataclass(frozen=True)
class LocalView:
    """Everything a driver observes: its own state, its route and the cells within its radius.

    ``cells`` holds ``(cell, map char)`` pairs, ``signals`` the headings each visible signalled
    intersection lets in at this tick, ``vehicles`` the other vehicles on the network in view.
    """
    tick: int
    position: tuple
    speed: int
    heading: Optional[Heading]
    destination: tuple
    route: tuple
    route_heading: Optional[Heading]
    cells: tuple
    signals: tuple
    vehicles: tuple
    v_max: int
    a_max: int

    @property
    def me(self):
        return VehicleView(self.position, self.speed, self.heading)

    @cached_property
    def _chars(self):
        return dict(self.cells)

    @cached_property
    def _phases(self):
        return dict(self.signals)

    def char(self, cell):
        return self._chars.get(cell, '#')

    def permitted(self, cell):
        return self._phases.get(cell, frozenset(HEADINGS))

    def red(self, cell, heading):
        """True when a signal at ``cell`` does not let ``heading`` in now."""
        return heading not in self.permitted(cell)

    def reach(self, cell, depth):
        """Cells a vehicle at ``cell`` can enter within ``depth`` moves, as far as seen."""
        seen, frontier = set(), [cell]
        for _ in range(depth):
            following = []
            for here in frontier:
                for heading in allowed_headings(self.char(here)):
                    there = heading.step(here)
                    if there not in seen and legal_move(self.char(here), self.char(there),
                                                        heading):
                        seen.add(there)
                        following.append(there)
            frontier = following
        return seen


@dataclass(frozen=True)
class Action:
    """Requested speed for this tick and heading of the first move."""
    speed: int
    heading: Optional[Heading] = None


LOCAL_VIEWS = structured_domain('local-views', check=lambda v: isinstance(v, LocalView))
ACTIONS = structured_domain('driving-actions', check=lambda v: isinstance(v, Action))
FRAMES = structured_domain('traffic-frames', check=lambda v: isinstance(v, TrafficFrame))


@dataclass(frozen=True)
class TrajectoryPoint:
    tick: int
    position: tuple
    speed: int
    heading: Optional[Heading]


@dataclass(frozen=True)
class Trajectory:
    vehicle: int
    points: tuple
    arrival_tick: Optional[int]


def valid_scenario(network, scenario, max_vehicles, v_max, horizon):
    """Membership test of the scenario domain of a traffic context."""
    if not isinstance(scenario, DrivingScenario) or scenario.horizon != horizon:
        return False
    if scenario.length > max_vehicles:
        return False
    origins = [v.origin for v in scenario.vehicles]
    if len(set(origins)) != len(origins):
        return False
    pairs = set(network.od_pairs)
    for vehicle in scenario.vehicles:
        if not 0 <= vehicle.speed <= v_max:
            return False
        if not (network.passable(vehicle.origin) and network.passable(vehicle.destination)):
            return False
        if pairs and (vehicle.origin, vehicle.destination) not in pairs:
            return False
        if network.route_length(vehicle.origin, vehicle.destination) is None:
            return False
    return True


def _origins(network):
    """Origins with their destinations: declared pairs, or every connected pair."""
    if network.od_pairs:
        grouped = {}
        for origin, destination in network.od_pairs:
            grouped.setdefault(origin, []).append(destination)
        return list(grouped.items())
    return [(cell, network.reachable_from(cell)) for cell in network.passable_cells()]


def enumerate_scenarios(network, max_vehicles, speeds=None, horizon=None, guard=SCENARIO_GUARD):
    """All scenarios of ``0..max_vehicles`` vehicles with distinct origins.

    Origins come in declaration order (row-major without declared pairs), each vehicle takes
    every destination of its origin and every initial speed of ``speeds``.
    """
    speeds = tuple(range(network.v_max + 1)) if speeds is None else tuple(speeds)
    horizon = network.horizon if horizon is None else horizon
    origins = _origins(network)
    total = 0
    for k in range(max_vehicles + 1):
        for chosen in combinations(origins, k):
            count = len(speeds) ** k
            for _, destinations in chosen:
                count *= len(destinations)
            total += count
    if total > guard:
        raise ExplosionGuard('%d scenarios exceed the enumeration guard of %d' % (total, guard))
    scenarios = []
    for k in range(max_vehicles + 1):
        for chosen in combinations(origins, k):
            for destinations in product(*(d for _, d in chosen)):
                for initial in product(speeds, repeat=k):
                    vehicles = zip((o for o, _ in chosen), initial, destinations)
                    scenarios.append(DrivingScenario.of(vehicles, horizon))
    return scenarios


def random_scenario(network, max_vehicles, v_max, horizon, rng):
    """Draw a scenario: vehicle count, origins, destinations and speeds uniformly."""
    origins = _origins(network)
    k = int(rng.integers(min(max_vehicles, len(origins)) + 1))
    chosen = sorted(int(i) for i in rng.choice(len(origins), k, replace=False)) if k else []
    vehicles = []
    for index in chosen:
        origin, destinations = origins[index]
        destination = destinations[int(rng.integers(len(destinations)))]
        vehicles.append((origin, int(rng.integers(v_max + 1)), destination))
    return DrivingScenario.of(vehicles, horizon)


def scenario_domain(network, max_vehicles, v_max, horizon):
    def check(scenario):
        return valid_scenario(network, scenario, max_vehicles, v_max, horizon)

    def sampler(rng):
        return random_scenario(network, max_vehicles, v_max, horizon, rng)

    enumerator = None
    if network.od_pairs:
        def enumerator():
            return enumerate_scenarios(network, max_vehicles, range(v_max + 1), horizon)
    return structured_domain(
        'scenarios:%s:n%d:v%d:h%d' % (network.name, max_vehicles, v_max, horizon),
        check, sampler, (('vehicles', 0, max_vehicles), ('speed', 0, v_max)), enumerator)


class TrafficContext(Context):
    """``C[S1, ..., Sn]`` driving up to ``n`` vehicles on a network; vehicle ``i`` uses ``Si``."""

    def __init__(self, network, n, v_max, a_max, radius, horizon):
        for name, value, minimum in (('v_max', v_max, 1), ('a_max', a_max, 1),
                                     ('radius', radius, 0), ('horizon', horizon, 1)):
            if value < minimum:
                raise PreconditionError('%s must be >= %d, got %r' % (name, minimum, value))
        super().__init__('traffic:%s' % network.name, n,
                         scenario_domain(network, max(n, 0), v_max, horizon), FRAMES,
                         LOCAL_VIEWS, ACTIONS, memoryless=False)
        self.network = network
        self.v_max = v_max
        self.a_max = a_max
        self.radius = radius
        self.horizon = horizon

    def apply(self, systems, testcase, seed):
        scenario = testcase.payload
        for index, system in enumerate(systems):
            system.reset(derive_seed(seed, 'vehicle', index))
        states = tuple(self.initial_state(v) for v in scenario.vehicles)
        frames = [TrafficFrame(0, states)]
        tick = 0
        while tick < scenario.horizon and not all(s.arrived for s in states):
            tick += 1
            states = self.advance(systems, scenario, states, tick)
            frames.append(TrafficFrame(tick, states))
        arrived = all(s.arrived for s in states)
        logger.debug('%s: %d vehicles, %d ticks, all arrived: %s',
                     testcase.id, scenario.length, tick, arrived)
        return Run((Step(f.tick, f) for f in frames), terminated=arrived, seed=seed)

    def initial_state(self, vehicle):
        heading = self.network.next_heading(vehicle.origin, vehicle.destination)
        return VehicleState(vehicle.origin, vehicle.speed, heading,
                            vehicle.origin == vehicle.destination)

    def observe(self, index, states, scenario, tick):
        state = states[index]
        destination = scenario.vehicles[index].destination
        row, col = state.position
        cells, signals = [], []
        for r in range(row - self.radius, row + self.radius + 1):
            span = self.radius - abs(r - row)
            for c in range(col - span, col + span + 1):
                if self.network.passable((r, c)):
                    cells.append(((r, c), self.network.char((r, c))))
                    if (r, c) in self.network.signals:
                        signals.append(((r, c), self.network.permitted((r, c), tick)))
        vehicles = sorted(
            (VehicleView(s.position, s.speed, s.heading) for i, s in enumerate(states)
             if i != index and not s.arrived and _distance(s.position, state.position)
             <= self.radius), key=lambda v: v.position)
        route = self.network.route(state.position, destination, limit=self.v_max)
        return LocalView(tick, state.position, state.speed, state.heading, destination, route,
                         self.network.next_heading(state.position, destination),
                         tuple(cells), tuple(signals), tuple(vehicles), self.v_max, self.a_max)

    def plan(self, state, destination, action):
        low = max(0, state.speed - self.a_max)
        high = min(state.speed + self.a_max, self.v_max)
        speed = min(max(int(action.speed), low), high)
        if speed == 0:
            return ()
        heading = action.heading or self.network.next_heading(state.position, destination)
        if heading is None:
            return ()
        return self.network.route(state.position, destination, heading, speed)

    def advance(self, systems, scenario, states, tick):
        paths = {}
        for index, state in enumerate(states):
            if state.arrived:
                continue
            view = self.observe(index, states, scenario, tick - 1)
            action = systems[index].react(view)
            if not isinstance(action, Action):
                raise TypeError('%r answered %r instead of an Action' % (systems[index], action))
            paths[index] = self.plan(state, scenario.vehicles[index].destination, action)
        entered = set()
        for index in sorted(paths):
            if paths[index] and paths[index][0] in entered:
                logger.debug('tick %d: vehicle %d yields %r', tick, index, paths[index][0])
                paths[index] = ()
            elif paths[index]:
                entered.add(paths[index][0])
        following = []
        for index, state in enumerate(states):
            if index not in paths:
                following.append(VehicleState(state.position, 0, state.heading, True))
                continue
            path = paths[index]
            position = path[-1] if path else state.position
            heading = Heading.between(path[-2] if len(path) > 1 else state.position,
                                      position) if path else state.heading
            following.append(VehicleState(position, len(path), heading,
                                          position == scenario.vehicles[index].destination,
                                          path))
        return tuple(following)


def _distance(first, second):
    return abs(first[0] - second[0]) + abs(first[1] - second[1])


def make_traffic_context(network, n, v_max=None, a_max=None, radius=None, horizon=None):
    """Traffic context of arity ``n`` on ``network``.

    Parameters default to the network header. The context accepts scenarios of up to ``n``
    vehicles with the context horizon; vehicles beyond the scenario leave their systems idle.
    """
    return TrafficContext(
        network, n,
        network.v_max if v_max is None else v_max,
        network.a_max if a_max is None else a_max,
        network.radius if radius is None else radius,
        network.horizon if horizon is None else horizon)


def _frames(run):
    frames = run.observations
    if not frames or not all(isinstance(f, TrafficFrame) for f in frames):
        raise NotATrafficRun('the run does not consist of traffic frames')
    return frames


def trajectories(run):
    """Per-vehicle trajectories of a traffic run, with arrival ticks."""
    frames = _frames(run)
    result = []
    for index in range(len(frames[0].vehicles)):
        points = tuple(TrajectoryPoint(f.tick, f.vehicles[index].position,
                                       f.vehicles[index].speed, f.vehicles[index].heading)
                       for f in frames)
        arrival = next((f.tick for f in frames if f.vehicles[index].arrived), None)
        result.append(Trajectory(index, points, arrival))
    return tuple(result)


def _substeps(before, after, steps):
    """Positions at sub-steps ``0..steps``; the vehicle stands still after its path."""
    cells = (before.position,) + after.path
    return [cells[min(j, len(cells) - 1)] for j in range(steps + 1)]


def find_collision(run):
    """First collision of a traffic run as ``(tick, i, j, description)``, or None."""
    frames = _frames(run)
    for previous, frame in zip(frames, frames[1:]):
        active = [i for i, s in enumerate(previous.vehicles) if not s.arrived]
        steps = max([len(frame.vehicles[i].path) for i in active] or [0])
        tracks = dict((i, _substeps(previous.vehicles[i], frame.vehicles[i], steps))
                      for i in active)
        for j in range(1, steps + 1):
            for a, b in combinations(active, 2):
                if tracks[a][j] == tracks[b][j]:
                    return (frame.tick, a, b, 'vehicles %d and %d meet at %r at tick %d'
                            % (a, b, tracks[a][j], frame.tick))
                if tracks[a][j] == tracks[b][j - 1] and tracks[b][j] == tracks[a][j - 1] \
                        and tracks[a][j] != tracks[a][j - 1]:
                    return (frame.tick, a, b, 'vehicles %d and %d pass through each other '
                            'between %r and %r at tick %d'
                            % (a, b, tracks[a][j - 1], tracks[a][j], frame.tick))
    return None


def collision_free(run):
    """Fail with the first colliding pair and tick, Pass otherwise."""
    collision = find_collision(run)
    if collision is None:
        return Verdict.passed()
    return Verdict.failed(collision[3])


def no_congestion(run, deadline, horizon=None):
    """Pass when every vehicle arrives by ``deadline``; Fail listing the late vehicles."""
    if horizon is not None and deadline > horizon:
        raise PreconditionError('deadline %d exceeds the horizon %d' % (deadline, horizon))
    late = [t.vehicle for t in trajectories(run)
            if t.arrival_tick is None or t.arrival_tick > deadline]
    if late:
        return Verdict.failed('vehicles %s not arrived by tick %d'
                              % (', '.join(str(i) for i in late), deadline))
    return Verdict.passed()


def collision_property():
    return Property('collision free', lambda testcase, run: collision_free(run))


def congestion_property(deadline):
    def check(testcase, run):
        return no_congestion(run, deadline, testcase.payload.horizon)
    return Property('no congestion by tick %d' % deadline, check)


def obeys_signals(network):
    """Property failing when a vehicle enters a signalled intersection against its phase.

    Moves of tick ``k`` are governed by the phase shown at tick ``k - 1``, the frame the
    drivers observed.
    """
    def check(testcase, run):
        frames = _frames(run)
        for previous, frame in zip(frames, frames[1:]):
            for index, state in enumerate(frame.vehicles):
                if previous.vehicles[index].arrived:
                    continue
                here = previous.vehicles[index].position
                for cell in state.path:
                    heading = Heading.between(here, cell)
                    if cell in network.signals and \
                            heading not in network.permitted(cell, previous.tick):
                        return Verdict.failed('vehicle %d enters %r heading %s on red at tick %d'
                                              % (index, cell, heading.name, frame.tick))
                    here = cell
        return Verdict.passed()
    return Property('obeys signals', check)


@dataclass(frozen=True)
class ScenarioBands:
    """Cut points of the density and mean-route-length bands; a value on a cut is below it."""
    density: tuple = (0.1, 0.2)
    route: tuple = (4.0,)

    def __post_init__(self):
        for name in ('density', 'route'):
            cuts = tuple(float(x) for x in getattr(self, name))
            if any(b <= a for a, b in zip(cuts, cuts[1:])):
                raise PreconditionError('%s cut points must increase' % name)
            object.__setattr__(self, name, cuts)

    @staticmethod
    def labels(cuts, names):
        count = len(cuts) + 1
        if count == 1:
            return ('any',)
        if count == 2:
            return names[0], names[2]
        if count == 3:
            return names
        return tuple('%s%d' % (names[0][0], i) for i in range(count))

    def density_labels(self):
        return self.labels(self.density, ('low', 'medium', 'high'))

    def route_labels(self):
        return self.labels(self.route, ('short', 'medium', 'long'))


def scenario_features(network, scenario):
    """``(vehicle density, mean shortest route length)`` of a scenario."""
    if not scenario.vehicles:
        return 0.0, 0.0
    density = scenario.length / len(network.passable_cells())
    lengths = [network.route_length(v.origin, v.destination) for v in scenario.vehicles]
    return density, sum(lengths) / len(lengths)


def scenario_classifier(network, bands=None, weights=None):
    """Classify scenarios as ``"<density band>/<route band>"``, e.g. ``"low/short"``."""
    bands = bands or ScenarioBands()
    densities, routes = bands.density_labels(), bands.route_labels()

    def classify(testcase):
        density, route = scenario_features(network, testcase.payload)
        return '%s/%s' % (densities[bisect_left(bands.density, density)],
                          routes[bisect_left(bands.route, route)])

    universe = ['%s/%s' % (d, r) for d in densities for r in routes]
    return EquivalenceClassifier('scenario-bands', classify, weights, universe)


def _format_cell(cell):
    return '%d,%d' % cell


def _parse_cell(text, where):
    try:
        row, col = (int(v) for v in text.split(','))
    except ValueError:
        raise MalformedSpec('%s: %r is not a row,col cell' % (where, text))
    return row, col


def parse_scenario(text, where='<text>'):
    header, lines = split_header(text, where)
    unknown = set(header) - {'version', 'horizon'}
    if unknown:
        raise MalformedSpec('%s: unknown header keys %s' % (where, ', '.join(sorted(unknown))))
    horizon = header.get('horizon')
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
        raise MalformedSpec('%s: horizon must be a positive integer' % where)
    vehicles = []
    for number, line in enumerate(lines, 1):
        fields = line.split()
        if len(fields) != 3 or not fields[1].isdigit():
            raise MalformedSpec('%s: vehicle %d must read "row,col speed row,col"'
                                % (where, number))
        vehicles.append((_parse_cell(fields[0], where), int(fields[1]),
                         _parse_cell(fields[2], where)))
    origins = [v[0] for v in vehicles]
    if len(set(origins)) != len(origins):
        raise MalformedSpec('%s: origins must be distinct' % where)
    return DrivingScenario.of(vehicles, horizon)


def load_scenario(path):
    with open(path, encoding='utf-8') as f:
        return parse_scenario(f.read(), str(path))


def format_scenario(scenario):
    lines = ['horizon: %d' % scenario.horizon, '---']
    lines.extend('%s %d %s' % (_format_cell(v.origin), v.speed, _format_cell(v.destination))
                 for v in scenario.vehicles)
    return '\n'.join(lines) + '\n'


def dump_scenario(scenario, path):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(format_scenario(scenario))
