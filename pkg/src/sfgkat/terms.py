"""Immutable tree nodes with cached structural hashes.

Derivative closures use expressions as dictionary keys over and over, so
hashing must not walk the whole tree each time.
"""


class Node:
    __slots__ = ("_h",)
    fields: tuple = ()

    def __init__(self, *args):
        if len(args) != len(self.fields):
            raise TypeError(f"{type(self).__name__} takes {len(self.fields)} arguments, got {len(args)}")
        for name, value in zip(self.fields, args):
            object.__setattr__(self, name, value)
        object.__setattr__(self, "_h", hash((type(self).__name__,) + args))

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not type(self) or other._h != self._h:
            return False
        return all(getattr(self, f) == getattr(other, f) for f in self.fields)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        args = ", ".join(repr(getattr(self, f)) for f in self.fields)
        return f"{type(self).__name__}({args})"

    def __reduce__(self):
        return (type(self), self.args)

    @property
    def args(self) -> tuple:
        return tuple(getattr(self, f) for f in self.fields)
