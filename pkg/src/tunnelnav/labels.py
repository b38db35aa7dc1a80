from enum import IntEnum


class ClassLabel(IntEnum):
    """Heading classes. The integer value is the one-hot / confusion-matrix index."""

    LEFT = 0
    CENTER = 1
    RIGHT = 2

    @classmethod
    def parse(cls, value) -> "ClassLabel":
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                raise ValueError(f"unknown class label {value!r}") from None
        return cls(int(value))

    @property
    def dirname(self) -> str:
        return self.name.lower()


N_CLASSES = len(ClassLabel)
