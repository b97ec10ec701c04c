"""A small reverse-mode automatic differentiation engine on numpy arrays.

Just enough surface for the three models: elementwise arithmetic with
broadcasting, 2-D matmul, the usual nonlinearities, reductions with max/mean,
reshape/concat/basic indexing, an embedding lookup and a sliding-window
unfold for valid convolutions. Everything is float64.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

__all__ = ["Tensor", "no_grad", "concat", "embedding", "sliding_windows"]

_GRAD_ENABLED = True


class no_grad:
    """Context manager that stops graph construction (for eval passes)."""

    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False
        return self

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev
        return False


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` (invert numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "name")

    def __init__(self, data, requires_grad: bool = False, parents=(), name: str = ""):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple = tuple(parents)
        self.name = name

    # -- plumbing ----------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}{tag})"

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self, grad: np.ndarray | None = None) -> None:
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without a gradient needs a scalar output")
            grad = np.ones_like(self.data)
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent, _ in node._parents:
                stack.append((parent, False))
        flowing: dict[int, np.ndarray] = {id(self): np.asarray(grad, dtype=np.float64)}
        for node in reversed(topo):
            g = flowing.pop(id(node), None)
            if g is None:
                continue
            if node.requires_grad and not node._parents:
                node.grad = g if node.grad is None else node.grad + g
            for parent, fn in node._parents:
                pg = fn(g)
                if id(parent) in flowing:
                    flowing[id(parent)] = flowing[id(parent)] + pg
                else:
                    flowing[id(parent)] = pg

    # -- graph building ----------------------------------------------------

    @staticmethod
    def _coerce(value) -> "Tensor":
        return value if isinstance(value, Tensor) else Tensor(value)

    @staticmethod
    def _result(data, parents: Sequence[tuple["Tensor", Callable]]) -> "Tensor":
        if not _GRAD_ENABLED:
            return Tensor(data)
        kept = tuple((p, fn) for p, fn in parents if p.requires_grad)
        return Tensor(data, requires_grad=bool(kept), parents=kept)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        return self._result(
            self.data + other.data,
            [
                (self, lambda g: _unbroadcast(g, self.data.shape)),
                (other, lambda g: _unbroadcast(g, other.data.shape)),
            ],
        )

    __radd__ = __add__

    def __neg__(self):
        return self._result(-self.data, [(self, lambda g: -g)])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        return self._result(
            self.data * other.data,
            [
                (self, lambda g: _unbroadcast(g * other.data, self.data.shape)),
                (other, lambda g: _unbroadcast(g * self.data, other.data.shape)),
            ],
        )

    __rmul__ = __mul__

    def __matmul__(self, other):
        other = self._coerce(other)
        if self.data.ndim != 2 or other.data.ndim != 2:
            raise ValueError("matmul supports 2-D operands only")
        return self._result(
            self.data @ other.data,
            [
                (self, lambda g: g @ other.data.T),
                (other, lambda g: self.data.T @ g),
            ],
        )

    # -- nonlinearities ------------------------------------------------------

    def tanh(self):
        out = np.tanh(self.data)
        return self._result(out, [(self, lambda g: g * (1.0 - out * out))])

    def sigmoid(self):
        x = self.data
        out = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
        return self._result(out, [(self, lambda g: g * out * (1.0 - out))])

    def relu(self):
        mask = self.data > 0
        return self._result(self.data * mask, [(self, lambda g: g * mask)])

    def log(self):
        return self._result(np.log(self.data), [(self, lambda g: g / self.data)])

    def clip(self, lo: float, hi: float):
        inside = (self.data >= lo) & (self.data <= hi)
        return self._result(
            np.clip(self.data, lo, hi), [(self, lambda g: g * inside)]
        )

    # -- reductions ----------------------------------------------------------

    def sum(self, axis: int | None = None):
        if axis is None:
            return self._result(
                np.array(self.data.sum()),
                [(self, lambda g: np.broadcast_to(g, self.data.shape).copy())],
            )
        out = self.data.sum(axis=axis)

        def back(g, axis=axis):
            return np.broadcast_to(np.expand_dims(g, axis), self.data.shape).copy()

        return self._result(out, [(self, back)])

    def mean(self, axis: int | None = None):
        denom = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis) * (1.0 / denom)

    def max(self, axis: int):
        idx = np.argmax(self.data, axis=axis)
        out = np.take_along_axis(self.data, np.expand_dims(idx, axis), axis=axis).squeeze(axis)

        def back(g, axis=axis, idx=idx):
            gx = np.zeros_like(self.data)
            np.put_along_axis(
                gx, np.expand_dims(idx, axis), np.expand_dims(g, axis), axis=axis
            )
            return gx

        return self._result(out, [(self, back)])

    # -- shape ops -----------------------------------------------------------

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return self._result(
            self.data.reshape(shape), [(self, lambda g: g.reshape(self.data.shape))]
        )

    def __getitem__(self, key):
        """Basic indexing only (ints and slices): each element read at most once."""

        def back(g, key=key):
            gx = np.zeros_like(self.data)
            gx[key] = g
            return gx

        return self._result(self.data[key], [(self, back)])


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    datas = [t.data for t in tensors]
    out = np.concatenate(datas, axis=axis)
    parents = []
    offset = 0
    for t in tensors:
        width = t.data.shape[axis]
        sl = [slice(None)] * out.ndim
        sl[axis] = slice(offset, offset + width)
        parents.append((t, lambda g, sl=tuple(sl): g[sl]))
        offset += width
    return Tensor._result(out, parents)


def embedding(table: Tensor, indices: np.ndarray) -> Tensor:
    """Row lookup ``table[indices]``; gradients scatter-add back into the table."""
    indices = np.asarray(indices)
    if not np.issubdtype(indices.dtype, np.integer):
        raise ValueError("embedding indices must be integers")

    def back(g, indices=indices):
        gt = np.zeros_like(table.data)
        np.add.at(gt, indices, g)
        return gt

    return Tensor._result(table.data[indices], [(table, back)])


def sliding_windows(x: Tensor, width: int) -> Tensor:
    """(B, S, D) -> (B, S-width+1, width*D): flattened k-gram windows."""
    b, s, d = x.data.shape
    if width > s:
        raise ValueError(f"window width {width} exceeds sequence length {s}")
    p = s - width + 1
    out = np.stack(
        [x.data[:, i : i + width, :].reshape(b, width * d) for i in range(p)], axis=1
    )

    def back(g, width=width, p=p, b=b, d=d):
        g4 = g.reshape(b, p, width, d)
        gx = np.zeros_like(x.data)
        for off in range(width):
            gx[:, off : off + p, :] += g4[:, :, off, :]
        return gx

    return Tensor._result(out, [(x, back)])
