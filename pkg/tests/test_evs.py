import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omnitok.errors import InvalidInputError
from omnitok.evs import (
    PINNED,
    FeatureTensor,
    apply_mask,
    decode_mask,
    decode_tensor,
    encode_mask,
    encode_tensor,
    evs_budget,
    evs_dissimilarity,
    evs_prune,
    retained_visual_tokens,
    splitmix64,
    synth_feature_tensor,
)
from omnitok.video import video_token_budget

from .oracles import cosine_dissimilarity_py, evs_mask_oracle, splitmix64_py, synth_values_py


def tensor(rows):
    return FeatureTensor(np.array(rows, dtype=float))


class TestDissimilarity:
    def test_identical_tubelets(self):
        f = synth_feature_tensor(3, 1, 5, 4).data
        d = evs_dissimilarity(FeatureTensor(np.concatenate([f, f])))
        assert np.all(d[0] == PINNED)
        assert np.allclose(d[1], 0.0, atol=1e-12)

    def test_antipodal_is_two(self):
        f = synth_feature_tensor(4, 1, 3, 6).data
        d = evs_dissimilarity(FeatureTensor(np.concatenate([f, -f])))
        assert np.allclose(d[1], 2.0)

    def test_orthogonal_is_one(self):
        d = evs_dissimilarity(tensor([[[1, 0]], [[0, 1]]]))
        assert d[1, 0] == 1.0

    def test_zero_vector_is_one(self):
        d = evs_dissimilarity(tensor([[[0, 0]], [[3, 4]], [[0, 0]]]))
        assert d[1, 0] == 1.0 and d[2, 0] == 1.0

    def test_pinned_beats_max_real(self):
        assert PINNED > 2.0

    def test_matches_scalar_oracle_bitwise(self):
        t = synth_feature_tensor(11, 6, 7, 9)
        d = evs_dissimilarity(t)
        for ti in range(1, 6):
            for s in range(7):
                ref = cosine_dissimilarity_py(list(t.data[ti, s]), list(t.data[ti - 1, s]))
                assert d[ti, s] == ref

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            tensor([[[1.0, math.nan]]])
        with pytest.raises(InvalidInputError):
            tensor([[[math.inf]]])
        with pytest.raises(InvalidInputError):
            FeatureTensor(np.zeros((0, 1, 1)))


class TestPrune:
    @pytest.mark.parametrize("q", [0.0, 0.5, 0.9, 0.99])
    def test_single_tubelet_keeps_everything(self, q):
        m = evs_prune(synth_feature_tensor(1, 1, 12, 4), q)
        assert m.keep.all() and m.retained == 12

    def test_static_video_keeps_anchor_only(self):
        f = synth_feature_tensor(5, 1, 4, 3).data
        m = evs_prune(FeatureTensor(np.concatenate([f, f])), 0.5)
        assert m.retained == 4
        assert m.keep[0].all() and not m.keep[1].any()

    def test_seed42_matches_full_sort(self):
        t = synth_feature_tensor(42, 8, 16, 8)
        m = evs_prune(t, 0.7)
        assert m.retained == 39 == max(16, math.ceil(0.3 * 128))
        assert m.keep.tolist() == evs_mask_oracle(t.data.tolist(), 0.7)

    def test_ties_prefer_earlier_index(self):
        # every t>=1 token has the same dissimilarity; budget leaves 2 extra slots
        base = np.ones((1, 4, 2))
        f = np.concatenate([base, np.tile([[[1.0, 0.0]]], (2, 4, 1))])
        m = evs_prune(FeatureTensor(f), 1 - 6 / 12)
        assert m.keep[0].all()
        assert m.keep[1].tolist() == [True, True, False, False]
        assert not m.keep[2].any()

    @pytest.mark.parametrize("q", [-0.1, 1.0, 1.5])
    def test_rejects_bad_q(self, q):
        with pytest.raises(InvalidInputError):
            evs_prune(synth_feature_tensor(0, 2, 2, 2), q)

    def test_kept_order_preserved(self):
        t = synth_feature_tensor(8, 5, 6, 3)
        m = evs_prune(t, 0.6)
        kept = apply_mask(t, m)
        idx = m.kept_indices()
        assert list(idx) == sorted(idx)
        assert np.array_equal(kept, t.data.reshape(-1, 3)[idx])

    def test_budget_uses_decimal_q(self):
        # (1 - 0.7) * 10 is 3.0000000000000004 in binary floating point
        assert evs_budget(10, 1, 0.7) == 3
        assert evs_budget(5, 2, 0.8) == 2


shapes = st.tuples(st.integers(1, 10), st.integers(1, 20), st.integers(1, 8))
qs = st.sampled_from([0.0, 0.25, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95])


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32), shapes, qs)
def test_mask_equals_oracle(seed, shape, q):
    t = synth_feature_tensor(seed, *shape)
    assert evs_prune(t, q).keep.tolist() == evs_mask_oracle(t.data.tolist(), q)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32), shapes, qs)
def test_feature_permutation_invariance(seed, shape, q):
    t = synth_feature_tensor(seed, *shape)
    perm = np.random.default_rng(seed).permutation(shape[2])
    m1 = evs_prune(t, q)
    m2 = evs_prune(FeatureTensor(t.data[:, :, perm]), q)
    # permuting changes summation order, so only compare away from near-ties
    d = np.sort(evs_dissimilarity(t).ravel()[np.isfinite(evs_dissimilarity(t).ravel())])
    if d.size > 1 and np.min(np.diff(d)) < 1e-9:
        return
    assert np.array_equal(m1.keep, m2.keep)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32), shapes, qs, st.sampled_from([0.5, 2.0, 4.0, 0.25]))
def test_positive_tubelet_scaling_invariance(seed, shape, q, scale):
    # power-of-two scale factors are exact, so no tie can be created or broken
    t = synth_feature_tensor(seed, *shape)
    scaled = t.data.copy()
    scaled[shape[0] // 2] *= scale
    assert np.array_equal(evs_prune(t, q).keep, evs_prune(FeatureTensor(scaled), q).keep)


@given(shapes)
def test_retained_monotone_in_q(shape):
    T, S, _ = shape
    grid = [0.0, 0.1, 0.3, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99]
    counts = [evs_budget(T, S, q) for q in grid]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert all(c >= S for c in counts)


class TestRetainedVisualTokens:
    def test_conv3d_plus_evs_512_frames(self):
        b = video_token_budget(512, 1024, True)
        assert retained_visual_tokens(b, 0.5) == 32768
        assert retained_visual_tokens(b, 0.5) + b.overhead_tokens == 42546

    def test_no_pruning(self):
        b = video_token_budget(512, 1024, True)
        assert retained_visual_tokens(b, 0.0) == b.visual_tokens

    def test_q09(self):
        b = video_token_budget(512, 1024, True)
        assert b.visual_tokens == 65536
        assert retained_visual_tokens(b, 0.9) == 6554

    def test_floor_is_one_frame(self):
        b = video_token_budget(2, 1024, True)
        assert retained_visual_tokens(b, 0.95) == 256


class TestSynth:
    def test_splitmix_reference_vector(self):
        # published outputs of the reference splitmix64.c for seed 1234567
        expected = [6457827717110365317, 3203168211198807973, 9817491932198370423,
                    4593380528125082431, 16408922859458223821]
        assert [int(x) for x in splitmix64(1234567, 5)] == expected
        assert splitmix64_py(1234567, 5) == expected

    def test_deterministic(self):
        a = synth_feature_tensor(7, 1, 1, 1).data
        b = synth_feature_tensor(7, 1, 1, 1).data
        assert a.tobytes() == b.tobytes()

    def test_seeds_differ(self):
        assert synth_feature_tensor(0, 1, 1, 1).data[0, 0, 0] == 0.7666216164272852
        assert synth_feature_tensor(1, 1, 1, 1).data[0, 0, 0] == 0.1331231503445618

    def test_golden_0_222(self):
        golden = [0.7666216164272852, -0.13694400590298006, -0.9471324568148045,
                  0.941763956307657, -0.7873066168655751, -0.3453484715637485,
                  -0.6522642680806343, 0.543093112663134]
        values = synth_feature_tensor(0, 2, 2, 2).data.ravel().tolist()
        assert values == golden
        assert synth_values_py(0, 8) == golden

    def test_range(self):
        v = synth_feature_tensor(99, 4, 32, 16).data
        assert v.min() >= -1 and v.max() < 1


class TestFormats:
    def test_tensor_round_trip(self, tmp_path):
        t = FeatureTensor(synth_feature_tensor(2, 3, 4, 5).data.astype(np.float32))
        blob = encode_tensor(t)
        assert blob[:4] == b"EVST"
        assert blob[4:20] == (1).to_bytes(4, "little") + bytes([3, 0, 0, 0, 4, 0, 0, 0, 5, 0, 0, 0])
        assert len(blob) == 20 + 4 * 60
        assert np.array_equal(decode_tensor(blob).data, t.data)

    def test_mask_round_trip(self):
        m = evs_prune(synth_feature_tensor(2, 3, 4, 5), 0.5)
        blob = encode_mask(m)
        assert blob[:4] == b"EVSM" and len(blob) == 16 + 12
        assert set(blob[16:]) <= {0, 1}
        back = decode_mask(blob)
        assert np.array_equal(back.keep, m.keep) and back.retained == m.retained

    @pytest.mark.parametrize("blob", [b"", b"XXXX" + bytes(16), b"EVST" + bytes(16) + b"\x00"])
    def test_bad_tensor_files(self, blob):
        with pytest.raises(InvalidInputError):
            decode_tensor(blob)

    def test_bad_version(self):
        blob = bytearray(encode_tensor(synth_feature_tensor(0, 1, 1, 1)))
        blob[4] = 2
        with pytest.raises(InvalidInputError):
            decode_tensor(bytes(blob))
