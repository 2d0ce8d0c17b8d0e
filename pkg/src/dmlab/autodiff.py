"""Minimal reverse-mode autodiff over numpy arrays.

Just enough ops to express the network's composite computation -- forward
pass, the input-gradient recursion, and the second-derivative recursion --
as one graph whose reverse pass yields exact parameter gradients of any
scalar loss built on top.
"""

import numpy as np


class Var:
    __slots__ = ("value", "grad", "parents", "vjp")

    def __init__(self, value, parents=(), vjp=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.parents = parents
        self.vjp = vjp


def const(value):
    return Var(value)


def _unbroadcast(g, shape):
    """Sum g down to `shape` (undo numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def add(a, b):
    return Var(a.value + b.value, (a, b),
               lambda g: (_unbroadcast(g, a.value.shape),
                          _unbroadcast(g, b.value.shape)))


def sub(a, b):
    return Var(a.value - b.value, (a, b),
               lambda g: (_unbroadcast(g, a.value.shape),
                          -_unbroadcast(g, b.value.shape)))


def mul(a, b):
    return Var(a.value * b.value, (a, b),
               lambda g: (_unbroadcast(g * b.value, a.value.shape),
                          _unbroadcast(g * a.value, b.value.shape)))


def matmul(a, b):
    return Var(a.value @ b.value, (a, b),
               lambda g: (g @ b.value.T, a.value.T @ g))


def transpose(a):
    return Var(a.value.T, (a,), lambda g: (g.T,))


def softplus(a):
    x = a.value
    return Var(np.logaddexp(0.0, x), (a,),
               lambda g: (g / (1.0 + np.exp(-x)),))


def sigmoid(a):
    s = 1.0 / (1.0 + np.exp(-a.value))
    return Var(s, (a,), lambda g: (g * s * (1.0 - s),))


def square(a):
    return Var(a.value ** 2, (a,), lambda g: (2.0 * g * a.value,))


def sum_all(a):
    shape = a.value.shape
    return Var(a.value.sum(), (a,), lambda g: (np.broadcast_to(g, shape),))


def scale(a, c: float):
    return Var(c * a.value, (a,), lambda g: (c * g,))


def backward(root: Var):
    """Populate .grad on every node reachable from `root` (a scalar)."""
    topo, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            stack.append((p, False))
    for node in topo:
        node.grad = None
    root.grad = np.ones_like(root.value)
    for node in reversed(topo):
        if node.vjp is None or node.grad is None:
            continue
        for parent, g in zip(node.parents, node.vjp(node.grad)):
            parent.grad = g if parent.grad is None else parent.grad + g
