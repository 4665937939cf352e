"""Rendering: element counts, marker classes, determinism, 3-d projection."""

import numpy as np
import pytest

from minnet.io import SCHEMA_VERSION, IoError, ResultFile, parse_result, serialize_result
from minnet.steiner import solve_exact
from minnet.svg import render_svg

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def _tree_result(terminals: np.ndarray) -> ResultFile:
    tree = solve_exact(terminals).tree
    return ResultFile(
        SCHEMA_VERSION,
        "sha256:" + "0" * 64,
        "steiner",
        terminals.shape[1],
        tree.length,
        tree.coords(),
        list(tree.topology.edges),
        n_terminals=terminals.shape[0],
    )


def _mdm_result() -> ResultFile:
    return ResultFile(
        SCHEMA_VERSION,
        "sha256:" + "0" * 64,
        "mdm",
        2,
        2.0,
        np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.5]]),
        [(0, 1), (1, 2)],
        r=0.75,
        report={"energetic": [[0.5, 0.0], [2.0, 0.5]]},
    )


class TestTreeRendering:
    def test_two_terminals_two_dots_one_path(self):
        svg = render_svg(_tree_result(np.array([[0.0, 0.0], [3.0, 1.0]])))
        assert svg.count("<circle") == 2
        assert svg.count("<path") == 1

    def test_square_dot_and_edge_counts(self):
        svg = render_svg(_tree_result(SQUARE))
        assert svg.count('class="terminal"') == 4
        assert svg.count('class="branch"') == 2
        assert svg.count('class="edge"') == 5
        assert svg.count("<circle") == 6
        assert svg.count("<path") == 5

    def test_terminal_and_branch_markers_are_distinct(self):
        svg = render_svg(_tree_result(SQUARE))
        term = next(l for l in svg.splitlines() if 'class="terminal"' in l)
        branch = next(l for l in svg.splitlines() if 'class="branch"' in l)
        t_fill = term.split('fill="')[1].split('"')[0]
        b_fill = branch.split('fill="')[1].split('"')[0]
        assert t_fill != b_fill

    def test_byte_identical_rerender(self):
        res = _tree_result(SQUARE)
        assert render_svg(res) == render_svg(res)

    def test_byte_identical_through_serialization(self):
        res = _tree_result(SQUARE)
        back = parse_result(serialize_result(res))
        assert render_svg(back) == render_svg(res)

    def test_valid_xml_header_and_footer(self):
        svg = render_svg(_tree_result(SQUARE))
        assert svg.startswith('<?xml version="1.0"')
        assert svg.rstrip().endswith("</svg>")


class TestMdmRendering:
    def test_dashed_tube_per_edge(self):
        svg = render_svg(_mdm_result())
        assert svg.count('class="tube"') == 2
        assert svg.count("stroke-dasharray") == 2
        tube = next(l for l in svg.splitlines() if 'class="tube"' in l)
        assert 'stroke-width="1.5000"' in tube  # 2 * r

    def test_energetic_markers_rendered_open(self):
        svg = render_svg(_mdm_result())
        assert svg.count('class="energetic"') == 2
        marker = next(l for l in svg.splitlines() if 'class="energetic"' in l)
        assert 'fill="none"' in marker

    def test_all_vertices_drawn_as_input_dots(self):
        svg = render_svg(_mdm_result())
        assert svg.count('class="terminal"') == 3
        assert svg.count('class="branch"') == 0


class TestProjection:
    def _tetra(self) -> ResultFile:
        pts = np.array(
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 0.9, 0.0], [0.5, 0.3, 0.8]]
        )
        return _tree_result(pts)

    def test_3d_requires_projection_flag(self):
        with pytest.raises(IoError, match="project"):
            render_svg(self._tetra())

    def test_3d_projects_with_warning_comment(self):
        svg = render_svg(self._tetra(), project=True)
        assert "orthographic projection" in svg
        assert svg.count('class="terminal"') == 4

    def test_higher_dims_rejected(self):
        res = _tree_result(SQUARE)
        res.dim = 4
        res.vertices = np.hstack([res.vertices, np.zeros((len(res.vertices), 2))])
        with pytest.raises(IoError, match="dim"):
            render_svg(res, project=True)
