# coding: UTF-8
"""Driver policies for traffic contexts.

A policy is a :class:`SystemUnderTest` whose stimuli are :class:`LocalView` observations and whose
responses are :class:`Action` decisions. It sees nothing beyond its observation radius.
"""
import logging

from .core import SystemUnderTest
from .network import Heading
from .traffic import ACTIONS, LOCAL_VIEWS, Action


logger = logging.getLogger(__name__)


class DriverPolicy(SystemUnderTest):

    def __init__(self, name):
        super().__init__(name, LOCAL_VIEWS, ACTIONS)

    def react(self, view):
        return self.decide(view)

    def decide(self, view):
        raise NotImplementedError


def has_priority(first, second):
    """True when ``first`` has right of way over ``second``.

    A vehicle coming from the right goes first; on a shared heading the vehicle ahead goes first;
    otherwise the smaller ``(row, col)``. Exactly one of two vehicles in distinct cells has
    priority, and both can tell which from what they see.
    """
    if first.heading is not None and second.heading is not None:
        if first.heading is second.heading.left:
            return True
        if second.heading is first.heading.left:
            return False
        if first.heading is second.heading:
            dr, dc = first.heading.delta
            ahead = first.position[0] * dr + first.position[1] * dc
            behind = second.position[0] * dr + second.position[1] * dc
            if ahead != behind:
                return ahead > behind
    return first.position < second.position


def _target_path(view):
    return view.route[:min(view.speed + view.a_max, view.v_max)]


def _truncate(path, stop):
    for index, cell in enumerate(path):
        if stop(index, cell):
            return path[:index]
    return path


def _red(view, path, index):
    """True when entering ``path[index]`` would run a red light."""
    previous = path[index - 1] if index else view.position
    return view.red(path[index], Heading.between(previous, path[index]))


class GreedyPolicy(DriverPolicy):
    """Shortest path at the highest reachable speed.

    Brakes only before cells it sees occupied, and stops at a red light only when it sees a
    vehicle travelling across its own axis.
    """

    def __init__(self, name='greedy'):
        super().__init__(name)

    def decide(self, view):
        occupied = set(v.position for v in view.vehicles)
        crossing = any(v.heading is not None and view.heading is not None
                       and v.heading.axis != view.heading.axis for v in view.vehicles)
        target = _target_path(view)
        path = _truncate(target, lambda i, cell: cell in occupied
                         or (crossing and _red(view, target, i)))
        return Action(len(path), view.route_heading)


class CautiousPolicy(DriverPolicy):
    """Obeys signals and gives way.

    Never enters a cell another vehicle stands on, nor any cell a vehicle with right of way could
    reach this tick (at most ``min(v + a_max, v_max)`` moves), and stops before red lights.

    Its headway is only the cells it refuses to enter: it assumes it can stop within one tick,
    i.e. ``a_max >= v_max`` as on every bundled map. With a weaker ``a_max`` the context still
    moves it at least ``speed - a_max`` cells, which can carry it into a stopped vehicle ahead.
    """

    def __init__(self, name='cautious'):
        super().__init__(name)

    def decide(self, view):
        me = view.me
        forbidden = set(v.position for v in view.vehicles)
        for other in view.vehicles:
            if has_priority(other, me):
                forbidden |= view.reach(other.position,
                                        min(other.speed + view.a_max, view.v_max))
        target = _target_path(view)
        path = _truncate(target, lambda i, cell: cell in forbidden or _red(view, target, i))
        if len(path) < len(target):
            logger.debug('%s at %r yields after %d of %d cells',
                         self.name, view.position, len(path), len(target))
        return Action(len(path), view.route_heading)


def builtin_policies():
    return {'cautious': CautiousPolicy(), 'greedy': GreedyPolicy()}
