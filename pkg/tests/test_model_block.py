import math

import pytest

from anoflip.model_block import (HALF_PI, BlockField, BlockPoint, FaceLabel, OutOfBlock,
                                 classify_face, closed_orbits, field_value, flip_field)


def close(a, b, tol=1e-12):
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def test_field_values():
    b = BlockField(1, 10)
    assert close(field_value(b, BlockPoint(0, 0, 0.3)), (0, 1, 0))
    assert close(field_value(b, BlockPoint(HALF_PI, 0, 0)), (0, 0, 10))
    assert close(field_value(BlockField(-1, 10), BlockPoint(HALF_PI, 0, 0)), (0, 0, -10))


def test_flip_field():
    assert flip_field(BlockField(1, 10)) == BlockField(-1, 10)
    assert flip_field(flip_field(BlockField(1, 7))) == BlockField(1, 7)
    b = BlockField(1, 10)
    for x in (-1.2, 0.0, 0.4):
        for y in (-1.0, 0.3):
            p = BlockPoint(x, y, 0.1)
            assert field_value(flip_field(b), p)[1] == field_value(b, p)[1]


def test_classify_face():
    assert classify_face(BlockPoint(0.1, -HALF_PI, 0)) is FaceLabel.INCOMING
    assert classify_face(BlockPoint(-HALF_PI, 0.2, 0.5)) is FaceLabel.TANGENT_LEFT
    assert classify_face(BlockPoint(HALF_PI, -HALF_PI, 0)) is FaceLabel.TANGENT_RIGHT
    assert classify_face(BlockPoint(0.1, HALF_PI, 0)) is FaceLabel.OUTGOING
    assert classify_face(BlockPoint(0.1, 0.1, 0)) is FaceLabel.INTERIOR


def test_closed_orbit_directions():
    a1, a2 = closed_orbits(BlockField(1, 3))
    assert (a1.direction, a2.direction) == (-1, 1)
    a1, a2 = closed_orbits(BlockField(-1, 3))
    assert (a1.direction, a2.direction) == (1, -1)


def test_out_of_block_and_bad_parameters():
    with pytest.raises(OutOfBlock):
        BlockPoint(2.0, 0, 0)
    with pytest.raises(ValueError):
        BlockField(0, 10)
    with pytest.raises(ValueError):
        BlockField(1, -1)


def test_z_wraps():
    assert math.isclose(BlockPoint(0, 0, 1.25).z, 0.25)
