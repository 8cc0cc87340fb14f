import io
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anchordeploy.errors import ProfileError
from anchordeploy.ssp import (
    BUILTIN_PROFILES,
    SoundSpeedProfile,
    builtin_profile,
    gradients,
    iso_profile,
    load_profile,
    load_profile_file,
    speeds_from_gradients,
    standardize,
)


def test_load_two_rows():
    p = load_profile("0 1500\n2000 1500")
    assert len(p) == 2
    assert p.max_depth == 2000


def test_load_duplicate_depth():
    with pytest.raises(ProfileError, match="duplicate"):
        load_profile("0 1500\n0 1510")


def test_load_unsorted_and_comments():
    text = "# header\n1000 1484\n0 1519  # surface\n3000,1530\n100 1505\n"
    p = load_profile(io.StringIO(text))
    assert list(p.depths) == [0, 100, 1000, 3000]
    assert list(p.speeds) == [1519, 1505, 1484, 1530]


@pytest.mark.parametrize(
    "text",
    ["0 1500", "", "0 1500\n10 -3", "0 1500\n10 abc", "0 1500\n10", "0 1500\n10 nan"],
)
def test_load_rejects(text):
    with pytest.raises(ProfileError):
        load_profile(text)


def test_missing_file_names_path(tmp_path):
    missing = tmp_path / "nope.txt"
    with pytest.raises(ProfileError, match="nope.txt"):
        load_profile_file(missing)


def test_load_file_roundtrip(tmp_path):
    f = tmp_path / "cast.txt"
    f.write_text("0 1500\n2 1530\n", encoding="utf-8")
    p = load_profile_file(f)
    assert p.name == "cast"


def test_standardize_midpoint():
    p = standardize(load_profile("0 1500\n2 1530"))
    assert list(p.depths) == [0, 1, 2]
    assert list(p.speeds) == [1500, 1515, 1530]


def test_standardize_iso():
    p = standardize(load_profile("0 1500\n3000 1500"))
    assert len(p) == 3001
    assert np.all(p.speeds == 1500)


def test_standardize_affine_value():
    p = standardize(load_profile("0 1519\n100 1505"))
    assert p.speeds[50] == pytest.approx(1512.0, rel=1e-12)


def test_standardize_flat_extension_warns():
    with pytest.warns(UserWarning):
        p = standardize(load_profile("10 1500\n20 1510"))
    assert p.depths[0] == 0
    assert np.all(p.speeds[:11] == 1500)


def test_standardize_fractional_end_truncates():
    p = standardize(load_profile("0 1500\n10.7 1510"))
    assert p.max_depth == 10


def test_standardize_too_shallow():
    with pytest.raises(ProfileError):
        standardize(load_profile("0 1500\n0.5 1501"))


def test_gradients():
    assert np.all(gradients(standardize(iso_profile(1500, 100))) == 0)
    g = gradients(standardize(load_profile("0 1500\n1 1515")))
    assert g[0] == pytest.approx(0.01, rel=1e-12)


def test_gradients_need_standardized():
    with pytest.raises(ProfileError):
        gradients(load_profile("0 1500\n10 1510"))


@pytest.mark.parametrize("name", BUILTIN_PROFILES)
def test_builtins_roundtrip(name):
    raw = builtin_profile(name)
    p = standardize(raw)
    assert standardize(p) == p
    at = raw.depths[raw.depths == np.floor(raw.depths)].astype(int)
    np.testing.assert_allclose(p.speeds[at], raw.speeds[np.isin(raw.depths, at)], rtol=1e-12)
    rebuilt = speeds_from_gradients(p.speeds[0], gradients(p))
    np.testing.assert_allclose(rebuilt, p.speeds, rtol=1e-12)


def test_unknown_builtin():
    with pytest.raises(ProfileError):
        builtin_profile("nope")


def test_profile_is_readonly():
    p = iso_profile(1500, 10)
    with pytest.raises(ValueError):
        p.speeds[0] = 1


def test_direct_construction_validates():
    with pytest.raises(ProfileError):
        SoundSpeedProfile(np.array([0.0, 0.0]), np.array([1500.0, 1500.0]))


rows = st.lists(
    st.tuples(st.integers(0, 3000), st.floats(1400, 1600, allow_nan=False)),
    min_size=2,
    max_size=12,
    unique_by=lambda r: r[0],
).filter(lambda r: max(d for d, _ in r) >= 1)


@settings(max_examples=60, deadline=None)
@given(rows)
def test_standardize_properties(r):
    text = "\n".join(f"{d} {s!r}" for d, s in r)
    raw = load_profile(text)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = standardize(raw)
    assert standardize(p) == p
    assert np.all(np.diff(p.depths) == 1.0)
    for d, s in r:
        if d >= raw.depths[0]:
            assert p.speeds[d] == pytest.approx(s, rel=1e-12)
    rebuilt = speeds_from_gradients(p.speeds[0], gradients(p))
    np.testing.assert_allclose(rebuilt, p.speeds, rtol=1e-12)
