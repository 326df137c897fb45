# coding: UTF-8
"""Grid road networks.

A network is a grid of cells, each one character of a map:

- ``.`` two-way road, any heading
- ``+`` intersection, any heading, optionally signalled
- ``^`` ``>`` ``v`` ``<`` one-way road heading north, east, south, west
- ``#`` blocked

A move from cell ``A`` to its neighbour ``B`` in heading ``h`` is legal when both ``A`` and ``B``
allow ``h``. Rows grow southwards, so heading north decreases the row.

Map file format
---------------
A YAML header, a line holding only ``---``, then the grid::

    version: 1
    v_max: 2
    a_max: 2
    radius: 4
    horizon: 12
    signals: {"2,2": [[3, EW], [3, NS]]}
    od_pairs: [[[2, 0], [2, 4]], [[4, 2], [0, 2]]]
    ---
    ##^##
    >>+>>
    ##^##

``signals`` maps an intersection ``"row,col"`` to its cyclic phases ``[duration, headings]``;
during a phase only the listed headings may enter. ``od_pairs`` declares the origin-destination
pairs of the operating domain; each must be connected.
"""
import logging
from enum import Enum

import networkx as nx
import yaml

from .errors import MalformedSpec, UnreachablePair


logger = logging.getLogger(__name__)

MAP_VERSION = 1
HEADER_KEYS = ('version', 'name', 'v_max', 'a_max', 'radius', 'horizon', 'signals', 'od_pairs')
DEFAULTS = {'v_max': 1, 'a_max': 1, 'radius': 2, 'horizon': 20}


class Heading(Enum):
    N = (-1, 0)
    E = (0, 1)
    S = (1, 0)
    W = (0, -1)

    @property
    def delta(self):
        return self.value

    @property
    def left(self):
        return _LEFT[self]

    @property
    def axis(self):
        return 'NS' if self in (Heading.N, Heading.S) else 'EW'

    def step(self, cell):
        return cell[0] + self.value[0], cell[1] + self.value[1]

    @classmethod
    def between(cls, start, end):
        """Heading of a unit move, None when the cells are not neighbours."""
        delta = (end[0] - start[0], end[1] - start[1])
        for heading in cls:
            if heading.value == delta:
                return heading
        return None


HEADINGS = (Heading.N, Heading.E, Heading.S, Heading.W)
_LEFT = {Heading.N: Heading.W, Heading.W: Heading.S, Heading.S: Heading.E, Heading.E: Heading.N}

ROAD, INTERSECTION, BLOCKED = '.', '+', '#'
ARROWS = {'^': Heading.N, '>': Heading.E, 'v': Heading.S, '<': Heading.W}
CELL_CHARS = (ROAD, INTERSECTION, BLOCKED) + tuple(ARROWS)


def allowed_headings(char):
    if char in ARROWS:
        return frozenset((ARROWS[char],))
    if char in (ROAD, INTERSECTION):
        return frozenset(HEADINGS)
    return frozenset()


def legal_move(source, target, heading):
    """Whether a vehicle may move from a cell of char ``source`` to a neighbour of char ``target``."""
    return heading in allowed_headings(source) and heading in allowed_headings(target)


class SignalSchedule:
    """Cyclic phases ``((duration, headings), ...)`` of one intersection."""

    def __init__(self, phases):
        self.phases = tuple((int(d), frozenset(h)) for d, h in phases)
        if not self.phases:
            raise MalformedSpec('a signal needs at least one phase')
        for duration, _ in self.phases:
            if duration < 1:
                raise MalformedSpec('signal phase durations must be >= 1, got %r' % duration)
        self.period = sum(d for d, _ in self.phases)

    def permitted(self, tick):
        offset = tick % self.period
        for duration, headings in self.phases:
            if offset < duration:
                return headings
            offset -= duration

    def __eq__(self, other):
        return isinstance(other, SignalSchedule) and self.phases == other.phases

    def __repr__(self):
        return 'SignalSchedule(%r)' % (self.phases,)


class RoadNetwork:
    """Validated grid network. Build with :func:`build_network` or :func:`load_network`.

    Attributes
    ----------
    grid : tuple of str
        One string per row.
    signals : dict
        ``{(row, col): SignalSchedule}``.
    od_pairs : tuple
        Declared ``((origin, destination), ...)``.
    v_max, a_max, radius, horizon : int
        Defaults for traffic contexts on this network.
    """

    def __init__(self, name, grid, signals=None, od_pairs=(), v_max=1, a_max=1, radius=2,
                 horizon=20):
        self.name = name
        self.grid = tuple(grid)
        self.height = len(self.grid)
        self.width = len(self.grid[0]) if self.grid else 0
        self.signals = dict(signals or {})
        self.od_pairs = tuple(od_pairs)
        self.v_max = v_max
        self.a_max = a_max
        self.radius = radius
        self.horizon = horizon
        self._distances = {}
        self.graph = nx.DiGraph()
        self.graph.add_nodes_from(self.passable_cells())
        for cell in self.passable_cells():
            for _, target in self.moves(cell):
                self.graph.add_edge(cell, target)

    def char(self, cell):
        row, col = cell
        if 0 <= row < self.height and 0 <= col < self.width:
            return self.grid[row][col]
        return BLOCKED

    def passable(self, cell):
        return self.char(cell) != BLOCKED

    def is_intersection(self, cell):
        return self.char(cell) == INTERSECTION

    def passable_cells(self):
        return [(r, c) for r in range(self.height) for c in range(self.width)
                if self.grid[r][c] != BLOCKED]

    def target(self, cell, heading):
        """Cell reached by one legal move, or None."""
        target = heading.step(cell)
        if legal_move(self.char(cell), self.char(target), heading):
            return target
        return None

    def moves(self, cell):
        """Legal ``(heading, target)`` moves in N, E, S, W order."""
        for heading in HEADINGS:
            target = self.target(cell, heading)
            if target is not None:
                yield heading, target

    def permitted(self, cell, tick):
        """Headings allowed to enter ``cell`` at ``tick``; every heading when unsignalled."""
        schedule = self.signals.get(cell)
        return frozenset(HEADINGS) if schedule is None else schedule.permitted(tick)

    def distances_to(self, destination):
        """``{cell: moves to destination}`` for every cell that can reach it."""
        if destination not in self._distances:
            self._distances[destination] = dict(nx.single_source_shortest_path_length(
                self.graph.reverse(copy=False), destination))
        return self._distances[destination]

    def reachable_from(self, origin):
        return sorted(nx.descendants(self.graph, origin) | {origin})

    def route_length(self, origin, destination):
        return self.distances_to(destination).get(origin)

    def next_heading(self, cell, destination):
        """First heading of a shortest path; ties go to N, E, S, W in that order."""
        distances = self.distances_to(destination)
        if cell == destination or cell not in distances:
            return None
        for heading, target in self.moves(cell):
            if distances.get(target) == distances[cell] - 1:
                return heading
        return None

    def route(self, cell, destination, first=None, limit=None):
        """Cells visited by following a shortest path, at most ``limit`` of them.

        With ``first`` the first move takes that heading; an illegal ``first`` yields no move.
        The route ends at the destination.
        """
        cells = []
        if first is not None and cell != destination and limit != 0:
            target = self.target(cell, first)
            if target is None:
                return ()
            cells.append(target)
        while limit is None or len(cells) < limit:
            here = cells[-1] if cells else cell
            heading = self.next_heading(here, destination)
            if heading is None:
                break
            cells.append(heading.step(here))
        return tuple(cells)

    def __repr__(self):
        return 'RoadNetwork(%r, %dx%d)' % (self.name, self.height, self.width)


def _cell(value, what):
    try:
        if isinstance(value, str):
            row, col = (int(v) for v in value.split(','))
        else:
            row, col = (int(v) for v in value)
    except (TypeError, ValueError):
        raise MalformedSpec('%s %r is not a "row,col" cell' % (what, value))
    return row, col


def _headings(text):
    try:
        return frozenset(Heading[letter] for letter in str(text).strip())
    except KeyError:
        raise MalformedSpec('signal phase %r must list headings among N, E, S, W' % (text,))


def _positive(header, key, minimum=1):
    value = header.get(key, DEFAULTS[key])
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise MalformedSpec('%s must be an integer >= %d, got %r' % (key, minimum, value))
    return value


def build_network(spec):
    """Validate a network description and build the :class:`RoadNetwork`.

    Parameters
    ----------
    spec : dict
        Header keys of the map format plus ``grid``, a list of row strings.

    Raises
    ------
    MalformedSpec
        Ill-formed grid, header, signal or pair.
    UnreachablePair
        A declared destination cannot be reached from its origin.
    """
    spec = dict(spec)
    grid = spec.pop('grid', None)
    unknown = set(spec) - set(HEADER_KEYS)
    if unknown:
        raise MalformedSpec('unknown network keys: %s' % ', '.join(sorted(unknown)))
    if spec.get('version', MAP_VERSION) != MAP_VERSION:
        raise MalformedSpec('unsupported map version %r' % spec['version'])
    if not grid:
        raise MalformedSpec('the grid is empty')
    grid = [str(row) for row in grid]
    if len(set(len(row) for row in grid)) != 1 or not grid[0]:
        raise MalformedSpec('grid rows must be non-empty and of equal width')
    for r, row in enumerate(grid):
        for c, char in enumerate(row):
            if char not in CELL_CHARS:
                raise MalformedSpec('unknown cell %r at %d,%d' % (char, r, c))
    parameters = dict((key, _positive(spec, key, 0 if key == 'radius' else 1))
                      for key in DEFAULTS)
    signals = {}
    for key, phases in (spec.get('signals') or {}).items():
        cell = _cell(key, 'signal')
        if not 0 <= cell[0] < len(grid) or not 0 <= cell[1] < len(grid[0]) \
                or grid[cell[0]][cell[1]] != INTERSECTION:
            raise MalformedSpec('signal at %r is not on an intersection' % (key,))
        try:
            signals[cell] = SignalSchedule((duration, _headings(h)) for duration, h in phases)
        except (TypeError, ValueError):
            raise MalformedSpec('signal at %r must list [duration, headings] phases' % (key,))
    network = RoadNetwork(spec.get('name', 'network'), grid, signals, (), **parameters)
    od_pairs = []
    for pair in spec.get('od_pairs') or ():
        try:
            origin, destination = pair
        except (TypeError, ValueError):
            raise MalformedSpec('od pair %r must be [origin, destination]' % (pair,))
        origin, destination = _cell(origin, 'origin'), _cell(destination, 'destination')
        for what, cell in (('origin', origin), ('destination', destination)):
            if not network.passable(cell):
                raise MalformedSpec('%s %r is not a road cell' % (what, cell))
        if network.route_length(origin, destination) is None:
            raise UnreachablePair('%r cannot reach %r' % (origin, destination))
        od_pairs.append((origin, destination))
    network.od_pairs = tuple(od_pairs)
    logger.debug('built %r with %d signals and %d od pairs', network, len(signals), len(od_pairs))
    return network


def split_header(text, path='<text>'):
    """Split ``header --- body`` text into the parsed YAML header and the body lines."""
    lines = text.splitlines()
    try:
        split = next(i for i, line in enumerate(lines) if line.strip() == '---')
    except StopIteration:
        raise MalformedSpec('%s: missing the "---" line after the header' % path)
    try:
        header = yaml.safe_load('\n'.join(lines[:split])) or {}
    except yaml.YAMLError as e:
        raise MalformedSpec('%s: unreadable header: %s' % (path, e))
    if not isinstance(header, dict):
        raise MalformedSpec('%s: the header must be a mapping' % path)
    return header, [line.rstrip() for line in lines[split + 1:] if line.strip()]


def parse_network(text, name='network'):
    header, grid = split_header(text, name)
    header.setdefault('name', name)
    header['grid'] = grid
    return build_network(header)


def load_network(path):
    with open(path, encoding='utf-8') as f:
        text = f.read()
    name = str(path).replace('\\', '/').rsplit('/', 1)[-1].rsplit('.', 1)[0]
    return parse_network(text, name)
