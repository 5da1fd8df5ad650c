import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cli.verify import suite_adjoint, suite_dilation
from tensor_core import layers
from tensor_core.errors import CacheError, DimensionError, GeometryError
from tensor_core.tensor import ConvSpec, Tensor


def _conv(x, W, spec, bias=None):
    return layers.conv2d(Tensor(x), W, bias, spec)


# ============================================================
# CONV2D
# ============================================================

@settings(max_examples=40, deadline=None)
@given(h=st.integers(1, 12), w=st.integers(1, 12), k=st.integers(1, 3), s=st.integers(1, 3),
       d=st.integers(1, 3), p=st.integers(0, 3))
def test_conv2d_output_dims_follow_formula(h, w, k, s, d, p):
    spec = ConvSpec(2, 1, k, k, stride=s, dilation=d, padding=p)
    extent = d * (k - 1) + 1
    if extent > h + 2 * p or extent > w + 2 * p:
        with pytest.raises(GeometryError):
            spec.output_hw(h, w)
        return
    out, _ = _conv(np.ones((1, 1, h, w)), np.ones(spec.weight_dims), spec)
    assert out.dims == (1, 2, (h + 2 * p - extent) // s + 1, (w + 2 * p - extent) // s + 1)


@pytest.mark.parametrize("k", [1, 3, 5, 7, 32])
@pytest.mark.parametrize("s", [1, 2, 32])
@pytest.mark.parametrize("p", [0, 1])
def test_conv2d_output_dims_for_block_sized_kernels(rng, k, s, p):
    h, w = 70, 45
    spec = ConvSpec(2, 1, k, k, stride=s, padding=p * (k // 2))
    out, _ = _conv(rng.standard_normal((1, 1, h, w)), rng.standard_normal(spec.weight_dims), spec)
    pad = spec.padding
    assert out.dims == (1, 2, (h + 2 * pad - k) // s + 1, (w + 2 * pad - k) // s + 1)


def test_conv2d_sums_window_without_flipping():
    x = np.arange(9, dtype=np.float64).reshape(1, 1, 3, 3)
    W = np.zeros((1, 1, 3, 3))
    W[0, 0, 0, 0] = 1.0  # solo el tap superior izquierdo
    out, _ = _conv(x, W, ConvSpec(1, 1, 3, 3, padding=1))
    # correlación: la salida (i, j) lee x(i−1, j−1)
    assert out.data[0, 0, 1, 1] == x[0, 0, 0, 0]
    assert out.data[0, 0, 2, 2] == x[0, 0, 1, 1]
    assert out.data[0, 0, 0, 0] == 0.0


def test_conv2d_adds_bias_per_channel(rng):
    x = rng.standard_normal((2, 3, 5, 5))
    W = rng.standard_normal((4, 3, 3, 3))
    spec = ConvSpec.same(3, 4, 3)
    without, _ = _conv(x, W, spec)
    with_bias, _ = _conv(x, W, spec, bias=np.arange(4.0))
    np.testing.assert_allclose(with_bias.data - without.data,
                               np.broadcast_to(np.arange(4.0).reshape(1, 4, 1, 1), without.dims))


def test_conv2d_rejects_channel_mismatch_naming_axis():
    with pytest.raises(DimensionError, match="channels"):
        _conv(np.zeros((1, 2, 4, 4)), np.zeros((1, 3, 3, 3)), ConvSpec(1, 3, 3, 3))


def test_conv2d_rejects_weights_that_disagree_with_spec():
    with pytest.raises(DimensionError, match="kernel_h"):
        _conv(np.zeros((1, 1, 4, 4)), np.zeros((1, 1, 2, 3)), ConvSpec(1, 1, 3, 3))


def test_same_spec_preserves_size_for_every_dilation():
    for d in (1, 2, 3):
        spec = ConvSpec.same(1, 1, 3, dilation=d)
        assert spec.padding == d
        assert spec.output_hw(9, 7) == (9, 7)
    with pytest.raises(GeometryError):
        ConvSpec.same(1, 1, 4)


# ============================================================
# CONVOLUCIÓN TRANSPUESTA
# ============================================================

def test_conv_transpose_stamps_blocks_when_kernel_equals_stride(rng):
    x = rng.standard_normal((1, 1, 2, 3))
    W = rng.standard_normal((1, 1, 4, 4))
    out, _ = layers.conv_transpose2d(Tensor(x), W, None, 4)
    assert out.dims == (1, 1, 8, 12)
    np.testing.assert_allclose(out.data[0, 0, 4:8, 8:12], x[0, 0, 1, 2] * W[0, 0])


def test_conv_transpose_output_size(rng):
    out, _ = layers.conv_transpose2d(Tensor(rng.standard_normal((1, 2, 3, 4))),
                                     rng.standard_normal((2, 5, 3, 3)), np.zeros(5), 2)
    assert out.dims == (1, 5, (3 - 1) * 2 + 3, (4 - 1) * 2 + 3)


def test_conv_transpose_is_adjoint_of_conv():
    result = suite_adjoint(50)
    assert result.ok, result.detail


# ============================================================
# DILATACIÓN
# ============================================================

def test_dilate_kernel_inserts_zeros(rng):
    W = rng.standard_normal((2, 1, 3, 3))
    big = layers.dilate_kernel(W, 3).data
    assert big.shape == (2, 1, 7, 7)
    np.testing.assert_array_equal(big[:, :, ::3, ::3], W)
    assert np.count_nonzero(big) == np.count_nonzero(W)
    with pytest.raises(GeometryError):
        layers.dilate_kernel(W, 0)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_dilated_conv_equals_conv_with_inflated_kernel_bitwise(rng, d):
    W = rng.standard_normal((3, 2, 3, 3))
    x = Tensor(rng.standard_normal((2, 2, 11, 9)))
    dilated, _ = layers.conv2d(x, W, None, ConvSpec(3, 2, 3, 3, dilation=d, padding=d))
    inflated = layers.dilate_kernel(W, d).data
    K = inflated.shape[2]
    plain, _ = layers.conv2d(x, inflated, None, ConvSpec(3, 2, K, K, padding=d))
    assert np.array_equal(dilated.data, plain.data)


def test_dilation_suite_passes():
    result = suite_dilation(30)
    assert result.ok, result.detail


# ============================================================
# RELU, CONCATENACIÓN, PÉRDIDA Y CACHÉS
# ============================================================

def test_relu_subgradient_is_zero_at_zero():
    x = Tensor(np.array([-1.0, 0.0, 2.0]).reshape(1, 1, 1, 3))
    out, cache = layers.relu(x)
    np.testing.assert_array_equal(out.data.ravel(), [0.0, 0.0, 2.0])
    grad = layers.relu_backward(Tensor(np.ones((1, 1, 1, 3))), cache)
    np.testing.assert_array_equal(grad.data.ravel(), [0.0, 0.0, 1.0])


def test_concat_keeps_order_and_split_inverts_it(rng):
    a = Tensor(rng.standard_normal((2, 1, 3, 3)))
    b = Tensor(rng.standard_normal((2, 2, 3, 3)))
    joined, cache = layers.concat_channels([a, b])
    assert joined.dims == (2, 3, 3, 3)
    ga, gb = layers.split_channels_backward(joined, cache)
    np.testing.assert_array_equal(ga.data, a.data)
    np.testing.assert_array_equal(gb.data, b.data)


def test_concat_rejects_spatial_mismatch():
    with pytest.raises(DimensionError, match="height"):
        layers.concat_channels([Tensor(np.zeros((1, 1, 3, 3))), Tensor(np.zeros((1, 1, 4, 3)))])


def test_mse_loss_value_and_gradient():
    loss, grad = layers.mse_loss(Tensor(np.zeros((2, 1, 2, 2))), Tensor(np.ones((2, 1, 2, 2))))
    assert loss == pytest.approx(2.0)
    np.testing.assert_allclose(grad.data, -0.5)


def test_cache_cannot_be_reused_or_fed_to_the_wrong_backward(rng):
    x = Tensor(rng.standard_normal((1, 1, 4, 4)))
    out, cache = _conv(x.data, rng.standard_normal((1, 1, 3, 3)), ConvSpec.same(1, 1, 3))
    with pytest.raises(CacheError):
        layers.relu_backward(out, cache)
    layers.conv2d_backward(out, cache)
    with pytest.raises(CacheError, match="stale"):
        layers.conv2d_backward(out, cache)


def test_backward_rejects_gradient_with_wrong_dims(rng):
    _, cache = layers.relu(Tensor(rng.standard_normal((1, 2, 3, 3))))
    with pytest.raises(DimensionError, match="channels"):
        layers.relu_backward(Tensor(np.ones((1, 3, 3, 3))), cache)


def test_tensor_requires_rank_four():
    with pytest.raises(DimensionError, match="rank"):
        Tensor(np.zeros((3, 3)))
    assert Tensor(np.zeros((1, 1, 2, 2), dtype=np.int64)).dtype == np.float64
