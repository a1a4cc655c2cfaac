"""Exception hierarchy shared across msseg."""


class MsSegError(Exception):
    """Base class for every error raised deliberately by msseg."""


class ImageFormatError(MsSegError):
    """An image file could not be decoded."""


class UnsupportedFormatError(ImageFormatError):
    pass


class PayloadSizeError(ImageFormatError):
    """Header dimensions disagree with the amount of pixel data present."""


class DimensionMismatchError(MsSegError, ValueError):
    pass


class EmptyMaskError(MsSegError):
    """A mask that must contain foreground pixels is empty."""


class MaskTooSmallError(MsSegError):
    pass


class DegenerateClusterError(MsSegError):
    """A cluster received zero total membership weight."""

    def __init__(self, index: int):
        super().__init__(f"cluster {index} has zero membership weight")
        self.index = index
