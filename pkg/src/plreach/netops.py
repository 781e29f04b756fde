"""Structural network surgery shared by the solver and the reductions."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .core import InputError, Layer, Network, identity, make_layer, relu

ZERO = Fraction(0)
ONE = Fraction(1)


def unit_rows(width: int, src: int, offset: int = 0) -> list:
    """Rows of a 0/1 matrix copying ``width`` consecutive sources starting at ``offset``."""
    return [[ONE if j == offset + i else ZERO for j in range(src)] for i in range(width)]


def id_layer(width: int) -> Layer:
    ident = identity()
    return make_layer(unit_rows(width, width), [ZERO] * width, [ident] * width)


def pad_to_depth(net: Network, depth: int) -> Network:
    """Copy the output forward through id layers until the net has ``depth`` layers."""
    if depth < len(net.layers):
        raise InputError("cannot pad to a smaller depth")
    extra = tuple(id_layer(net.output_dim) for _ in range(depth - len(net.layers)))
    return Network(net.input_dim, net.layers + extra)


def append_layer(net: Network, weights, bias, activations) -> Network:
    return Network(net.input_dim, net.layers + (make_layer(weights, bias, activations),))


def stack(n1: Network, n2: Network) -> Network:
    """Run ``n1`` and ``n2`` side by side on shared inputs; outputs are concatenated.

    The shallower net is padded with id layers first.
    """
    if n1.input_dim != n2.input_dim:
        raise InputError("networks disagree on input dimension")
    depth = max(len(n1.layers), len(n2.layers))
    n1, n2 = pad_to_depth(n1, depth), pad_to_depth(n2, depth)
    layers = []
    for ell, (a, b) in enumerate(zip(n1.layers, n2.layers)):
        if ell == 0:
            weights = list(a.weights) + list(b.weights)
        else:
            wa, wb = n1.layers[ell - 1].width, n2.layers[ell - 1].width
            weights = [tuple(r) + (ZERO,) * wb for r in a.weights]
            weights += [(ZERO,) * wa + tuple(r) for r in b.weights]
        layers.append(make_layer(weights, a.bias + b.bias, a.activations + b.activations))
    return Network(n1.input_dim, tuple(layers))


def with_passthrough(net: Network) -> Network:
    """Same net, but every layer also carries the raw inputs through id nodes.

    Outputs are ``(x_0..x_{n-1}, y_0..y_{m-1})``.
    """
    n = net.input_dim
    ident = identity()
    layers = []
    for ell, layer in enumerate(net.layers):
        if ell == 0:
            weights = unit_rows(n, n) + [list(r) for r in layer.weights]
        else:
            prev = net.layers[ell - 1].width
            weights = unit_rows(n, n + prev)
            weights += [[ZERO] * n + list(r) for r in layer.weights]
        layers.append(make_layer(weights, [ZERO] * n + list(layer.bias),
                                 [ident] * n + list(layer.activations)))
    return Network(n, tuple(layers))


def restrict_outputs(net: Network, keep: Sequence[int]) -> Network:
    last = net.layers[-1]
    kept = make_layer([last.weights[i] for i in keep], [last.bias[i] for i in keep],
                      [last.activations[i] for i in keep])
    return Network(net.input_dim, net.layers[:-1] + (kept,))


def replace_id_nodes(net: Network, include_output: bool = False) -> Network:
    """Replace every hidden id node by a ReLU pair computing relu(s) and relu(-s).

    The consumers of the pair read ``relu(s) - relu(-s) = s``, so the computed
    function is unchanged.  Output-layer id nodes are only split when
    ``include_output`` is set, which doubles the output (positive part, negative
    part) and therefore changes the function.
    """
    r = relu()
    # prev_map[j] lists (new column, sign) for old node j of the previous layer
    prev_map = [[(j, 1)] for j in range(net.input_dim)]
    width_prev = net.input_dim
    layers = []
    last = len(net.layers) - 1
    for ell, layer in enumerate(net.layers):
        rows, bias, acts, new_map = [], [], [], []
        for i, act in enumerate(layer.activations):
            row = [ZERO] * width_prev
            for j, w in enumerate(layer.weights[i]):
                for k, sgn in prev_map[j]:
                    row[k] += w * sgn
            split = act.name == "id" and (ell < last or include_output)
            if split:
                new_map.append([(len(rows), 1), (len(rows) + 1, -1)])
                rows += [row, [-v for v in row]]
                bias += [layer.bias[i], -layer.bias[i]]
                acts += [r, r]
            else:
                new_map.append([(len(rows), 1)])
                rows.append(row)
                bias.append(layer.bias[i])
                acts.append(act)
        layers.append(make_layer(rows, bias, acts))
        prev_map, width_prev = new_map, len(rows)
    return Network(net.input_dim, tuple(layers))

