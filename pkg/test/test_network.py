# coding: UTF-8

import os
from unittest import TestCase

from replacement_tester import network
from replacement_tester.errors import MalformedSpec, UnreachablePair
from replacement_tester.network import Heading, build_network, load_network, parse_network
from replacement_tester.registry import DATA_DIR


def crossing():
    return load_network(os.path.join(DATA_DIR, 'crossing.map'))


class HeadingTests(TestCase):

    def test_left_turns(self):
        self.assertEqual([h.left for h in network.HEADINGS],
                         [Heading.W, Heading.N, Heading.E, Heading.S])
        for heading in network.HEADINGS:
            self.assertIs(heading.left.left.left.left, heading)

    def test_between(self):
        self.assertIs(Heading.between((2, 2), (1, 2)), Heading.N)
        self.assertIs(Heading.between((2, 2), (2, 3)), Heading.E)
        self.assertIsNone(Heading.between((2, 2), (3, 3)))
        self.assertEqual(Heading.S.step((0, 0)), (1, 0))
        self.assertEqual(Heading.W.axis, 'EW')

    def test_legal_move(self):
        self.assertTrue(network.legal_move('>', '+', Heading.E))
        self.assertFalse(network.legal_move('>', '.', Heading.W))
        self.assertFalse(network.legal_move('.', '#', Heading.N))
        self.assertFalse(network.legal_move('^', '>', Heading.N))


class RoadNetworkTests(TestCase):

    def test_bundled_crossing(self):
        net = crossing()
        self.assertEqual(net.name, 'crossing')
        self.assertEqual((net.v_max, net.a_max, net.radius, net.horizon), (2, 2, 4, 12))
        self.assertEqual(len(net.passable_cells()), 9)
        self.assertEqual(len(net.od_pairs), 8)
        self.assertTrue(net.is_intersection((2, 2)))
        self.assertFalse(net.passable((0, 0)))
        self.assertFalse(net.passable((-1, 2)))

    def test_routes(self):
        net = crossing()
        self.assertEqual(net.route_length((2, 0), (0, 2)), 4)
        self.assertEqual(net.route((2, 0), (0, 2)), ((2, 1), (2, 2), (1, 2), (0, 2)))
        self.assertEqual(net.route((2, 0), (0, 2), limit=2), ((2, 1), (2, 2)))
        self.assertEqual(net.next_heading((2, 2), (2, 4)), Heading.E)
        self.assertIsNone(net.route_length((2, 4), (2, 0)))
        self.assertEqual(net.route((2, 1), (2, 4), first=Heading.N), ())
        self.assertEqual(net.reachable_from((0, 2)), [(0, 2)])

    def test_shortest_path_ties_prefer_north(self):
        net = parse_network('---\n...\n...\n', 'open')
        self.assertIs(net.next_heading((1, 0), (0, 1)), Heading.N)
        self.assertEqual(net.route_length((1, 0), (0, 1)), 2)

    def test_signals(self):
        net = load_network(os.path.join(DATA_DIR, 'signalled.map'))
        schedule = net.signals[(2, 2)]
        self.assertEqual(schedule.period, 6)
        self.assertEqual(net.permitted((2, 2), 0), frozenset((Heading.E, Heading.W)))
        self.assertEqual(net.permitted((2, 2), 4), frozenset((Heading.N, Heading.S)))
        self.assertEqual(net.permitted((2, 2), 6), frozenset((Heading.E, Heading.W)))
        self.assertEqual(net.permitted((2, 1), 4), frozenset(network.HEADINGS))

    def test_defaults(self):
        net = parse_network('---\n>>>\n', 'road')
        self.assertEqual((net.v_max, net.a_max, net.radius, net.horizon), (1, 1, 2, 20))


class MalformedMapTests(TestCase):

    def test_grid(self):
        for grid in ([], ['..', '.'], ['.x']):
            with self.assertRaises(MalformedSpec):
                build_network({'grid': grid})

    def test_header(self):
        for header in ({'colour': 'red'}, {'version': 2}, {'v_max': 0}, {'radius': -1},
                       {'signals': {'0,0': [[3, 'EW']]}},
                       {'signals': {'0,1': [[0, 'EW']]}},
                       {'signals': {'0,1': [[3, 'EQ']]}}):
            spec = dict(header, grid=['.+.'])
            with self.assertRaises(MalformedSpec):
                build_network(spec)

    def test_missing_separator(self):
        with self.assertRaises(MalformedSpec):
            parse_network('v_max: 2\n...\n')

    def test_unreachable_pair(self):
        with self.assertRaises(UnreachablePair):
            build_network({'grid': ['>>>'], 'od_pairs': [[[0, 2], [0, 0]]]})
        with self.assertRaises(MalformedSpec):
            build_network({'grid': ['>>>'], 'od_pairs': [[[0, 0]]]})
