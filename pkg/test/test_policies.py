# coding: UTF-8

import os
from unittest import TestCase

from hypothesis import assume, given, strategies as st

from replacement_tester import core
from replacement_tester.network import HEADINGS, Heading, load_network, parse_network
from replacement_tester.policies import CautiousPolicy, DriverPolicy, GreedyPolicy, \
    builtin_policies, has_priority
from replacement_tester.registry import DATA_DIR
from replacement_tester.traffic import Action, DrivingScenario, VehicleView, find_collision, \
    make_traffic_context


cells = st.tuples(st.integers(0, 6), st.integers(0, 6))
headings = st.one_of(st.none(), st.sampled_from(HEADINGS))


def crossing_views(vehicles):
    context = make_traffic_context(load_network(os.path.join(DATA_DIR, 'crossing.map')),
                                   len(vehicles))
    scenario = DrivingScenario.of(vehicles, context.horizon)
    states = tuple(context.initial_state(v) for v in scenario.vehicles)
    return [context.observe(i, states, scenario, 0) for i in range(len(states))]


class Parked(DriverPolicy):
    """Never moves."""

    def decide(self, view):
        return Action(0, None)


class PriorityTests(TestCase):

    @given(cells, headings, cells, headings)
    def test_exactly_one_has_priority(self, first, first_heading, second, second_heading):
        assume(first != second)
        a, b = VehicleView(first, 1, first_heading), VehicleView(second, 1, second_heading)
        self.assertNotEqual(has_priority(a, b), has_priority(b, a))

    def test_right_hand_rule(self):
        eastbound = VehicleView((2, 0), 2, Heading.E)
        northbound = VehicleView((4, 2), 2, Heading.N)
        self.assertTrue(has_priority(northbound, eastbound))

    def test_vehicle_ahead_goes_first(self):
        ahead = VehicleView((2, 3), 1, Heading.E)
        behind = VehicleView((2, 1), 1, Heading.E)
        self.assertTrue(has_priority(ahead, behind))


class PolicyTests(TestCase):

    def test_views(self):
        east, north = crossing_views([((2, 0), 2, (2, 4)), ((4, 2), 2, (0, 2))])
        self.assertEqual(east.route, ((2, 1), (2, 2)))
        self.assertEqual(east.route_heading, Heading.E)
        self.assertEqual([v.position for v in east.vehicles], [(4, 2)])
        self.assertEqual(east.char((2, 2)), '+')
        self.assertEqual(east.reach((4, 2), 2), {(3, 2), (2, 2)})
        self.assertEqual(north.me, VehicleView((4, 2), 2, Heading.N))

    def test_greedy_keeps_going(self):
        east, north = crossing_views([((2, 0), 2, (2, 4)), ((4, 2), 2, (0, 2))])
        self.assertEqual(GreedyPolicy().decide(east), Action(2, Heading.E))
        self.assertEqual(GreedyPolicy().decide(north), Action(2, Heading.N))

    def test_cautious_gives_way(self):
        east, north = crossing_views([((2, 0), 2, (2, 4)), ((4, 2), 2, (0, 2))])
        self.assertEqual(CautiousPolicy().decide(east), Action(1, Heading.E))
        self.assertEqual(CautiousPolicy().decide(north), Action(2, Heading.N))

    def test_both_brake_behind_a_vehicle(self):
        behind, ahead = crossing_views([((2, 0), 2, (2, 4)), ((2, 1), 0, (2, 4))])
        self.assertEqual(GreedyPolicy().decide(behind).speed, 0)
        self.assertEqual(CautiousPolicy().decide(behind).speed, 0)
        self.assertEqual(CautiousPolicy().decide(ahead).speed, 2)

    def test_builtin_policies(self):
        policies = builtin_policies()
        self.assertEqual(sorted(policies), ['cautious', 'greedy'])
        self.assertEqual(policies['greedy'].react(crossing_views([((2, 0), 0, (0, 2))])[0]),
                         Action(2, Heading.E))

    def test_cautious_needs_enough_braking(self):
        road = parse_network('v_max: 3\na_max: 3\n---\n>>>>>>>>\n', 'road')
        scenario = DrivingScenario.of([((0, 2), 0, (0, 7)), ((0, 0), 3, (0, 7))], 6)

        def run(a_max):
            context = make_traffic_context(road, 2, a_max=a_max, horizon=6)
            case = core.TestCase.of('t', scenario, context.input_domain)
            return core.run_experiment(context, [Parked('parked'), CautiousPolicy()], case, 0)

        self.assertIsNone(find_collision(run(3)))
        self.assertEqual(find_collision(run(1))[:3], (1, 0, 1))
