import numpy as np
import pytest

from vpp.imaging import ImageGray, ImageRGB, compute_cdf, mean_luminance, rgb_to_lab
from vpp.photometric import (
    color_transfer,
    crop_around_quad,
    histogram_match,
    histogram_matching_lut,
    lab_channel_stats,
    lab_light_transfer,
    match_brightness,
    transfer_channel_stats,
)
from conftest import flat_rgb, random_rgb


def stats64(lab_data):
    flat = lab_data.reshape(-1, 3).astype(np.float64)
    return flat.mean(axis=0), flat.std(axis=0)


class TestMatchBrightness:
    def test_fixed_point(self, rng):
        img = random_rgb(rng, 20, 20)
        assert np.array_equal(match_brightness(img, img).data, img.data)

    def test_flat_shift(self):
        ad = flat_rgb(100, 100, 100)
        bg = flat_rgb(150, 150, 150)
        out = match_brightness(ad, bg)
        assert np.all(out.data == 150)
        assert mean_luminance(out) == pytest.approx(mean_luminance(bg), abs=2.0)

    def test_clamped_no_wraparound(self):
        ad = flat_rgb(255, 255, 255)
        bg = flat_rgb(3, 3, 3)
        out = match_brightness(ad, bg)
        assert np.all(out.data == 3)
        dark_ad = flat_rgb(0, 0, 0)
        out2 = match_brightness(dark_ad, flat_rgb(255, 255, 255))
        assert np.all(out2.data == 255)
        mixed = ImageRGB(np.array([[[0, 0, 0], [255, 255, 255]]], np.uint8))
        out3 = match_brightness(mixed, flat_rgb(10, 10, 10))
        assert out3.data.min() >= 0 and out3.data.max() <= 255

    def test_mean_matches_background(self, rng):
        for _ in range(10):
            ad = ImageRGB(rng.integers(60, 190, (24, 24, 3)).astype(np.uint8))
            bg = ImageRGB(rng.integers(60, 190, (16, 40, 3)).astype(np.uint8))
            out = match_brightness(ad, bg)
            assert abs(mean_luminance(out) - mean_luminance(bg)) <= 2.0

    def test_alpha_contrast(self):
        ad = ImageRGB(np.array([[[100, 100, 100], [120, 120, 120]]], np.uint8))
        out = match_brightness(ad, flat_rgb(110, 110, 110), alpha=2.0)
        assert int(out.data[0, 1, 0]) - int(out.data[0, 0, 0]) == 40


class TestColorTransfer:
    def test_fixed_point(self, rng):
        img = random_rgb(rng, 24, 24)
        out = color_transfer(img, img)
        assert np.abs(out.data.astype(int) - img.data.astype(int)).max() <= 1

    def test_flat_gray_to_flat_blue(self):
        out = color_transfer(flat_rgb(119, 119, 119), flat_rgb(10, 20, 200))
        assert np.abs(out.data[0, 0].astype(int) - [10, 20, 200]).max() <= 1

    def test_preclamp_stats_match_background(self, rng):
        ad_lab = rgb_to_lab(random_rgb(rng, 40, 30))
        bg_lab = rgb_to_lab(random_rgb(rng, 25, 50))
        out = transfer_channel_stats(ad_lab, bg_lab)
        mu_o, sd_o = stats64(out.data)
        mu_b, sd_b = stats64(bg_lab.data)
        assert np.abs(mu_o - mu_b).max() < 1e-3
        assert np.abs(sd_o - sd_b).max() < 1e-3


class TestLabLightTransfer:
    def test_fixed_point(self, rng):
        img = random_rgb(rng, 24, 24)
        out = lab_light_transfer(img, img)
        assert np.abs(out.data.astype(int) - img.data.astype(int)).max() <= 1

    def test_ab_bit_identical_in_lab_domain(self, rng):
        ad_lab = rgb_to_lab(random_rgb(rng, 30, 30))
        bg_lab = rgb_to_lab(random_rgb(rng, 30, 30))
        out = transfer_channel_stats(ad_lab, bg_lab, channels=(0,))
        assert np.abs(out.data[..., 1] - ad_lab.data[..., 1]).max() == 0.0
        assert np.abs(out.data[..., 2] - ad_lab.data[..., 2]).max() == 0.0
        mu_o, _ = stats64(out.data)
        mu_b, _ = stats64(bg_lab.data)
        assert abs(mu_o[0] - mu_b[0]) < 1e-3

    def test_red_stays_red(self, rng):
        red = np.zeros((20, 20, 3), np.uint8)
        red[:] = (200, 30, 30)
        bright = ImageRGB(rng.integers(180, 256, (20, 20, 3)).astype(np.uint8))
        out = lab_light_transfer(ImageRGB(red), bright)
        out_lab = rgb_to_lab(out).data
        assert out_lab[..., 1].mean() > 20  # still strongly red (positive a)

    def test_grayscale_stays_grayscale(self, rng):
        g = rng.integers(0, 256, (16, 16)).astype(np.uint8)
        gray = ImageRGB(np.repeat(g[:, :, None], 3, axis=2))
        out = lab_light_transfer(gray, random_rgb(rng, 16, 16))
        spread = out.data.astype(int).max(axis=2) - out.data.astype(int).min(axis=2)
        assert spread.max() <= 2  # neutral chroma survives the round trip


class TestHistogramMatch:
    def test_fixed_point(self, rng):
        img = random_rgb(rng, 24, 24)
        assert np.array_equal(histogram_match(img, img).data, img.data)

    def test_binary_vs_uniform(self):
        ad = np.zeros((16, 16), np.uint8)
        ad[8:] = 255  # 50/50 split of 0 and 255
        bg = np.arange(256, dtype=np.uint8).reshape(16, 16)  # exactly uniform
        lut = histogram_matching_lut(
            compute_cdf(ImageGray(ad)), compute_cdf(ImageGray(bg))
        )
        assert lut[0] == 127
        assert lut[255] == 255

    def test_matches_bruteforce_lut_oracle(self, rng):
        ad = random_rgb(rng, 20, 16)
        bg = random_rgb(rng, 32, 8)
        out = histogram_match(ad, bg)
        for c in range(3):
            src = compute_cdf(ImageGray(np.ascontiguousarray(ad.data[..., c]))).values
            dst = compute_cdf(ImageGray(np.ascontiguousarray(bg.data[..., c]))).values
            lut = np.empty(256, np.uint8)
            for v in range(256):
                u = 0
                while u < 255 and dst[u] < src[v]:
                    u += 1
                lut[v] = u
            assert np.array_equal(out.data[..., c], lut[ad.data[..., c]])

    def test_lut_monotone(self, rng):
        for _ in range(20):
            a = compute_cdf(ImageGray(rng.integers(0, 256, (16, 16)).astype(np.uint8)))
            b = compute_cdf(ImageGray(rng.integers(0, 256, (16, 16)).astype(np.uint8)))
            lut = histogram_matching_lut(a, b)
            assert np.all(np.diff(lut.astype(int)) >= 0)

    def test_cdf_sup_distance_bound(self, rng):
        # ad with an exactly uniform histogram: every value appears N/256
        # times, so the quantization bound 1/256 + 1/N applies
        vals = np.repeat(np.arange(256, dtype=np.uint8), 12)
        rng.shuffle(vals)
        ad = ImageRGB(np.stack([vals.reshape(48, 64)] * 3, axis=2))
        bg = random_rgb(rng, 40, 40)
        out = histogram_match(ad, bg)
        n = ad.width * ad.height
        for c in range(3):
            out_cdf = compute_cdf(ImageGray(np.ascontiguousarray(out.data[..., c]))).values
            bg_cdf = compute_cdf(ImageGray(np.ascontiguousarray(bg.data[..., c]))).values
            assert np.abs(out_cdf - bg_cdf).max() <= 1.0 / 256.0 + 1.0 / n


class TestStatsAndCrop:
    def test_lab_channel_stats(self, rng):
        lab = rgb_to_lab(random_rgb(rng, 12, 12))
        stats = lab_channel_stats(lab)
        mu, sd = stats64(lab.data)
        for c in range(3):
            assert stats[c].mean == pytest.approx(mu[c], abs=1e-6)
            assert stats[c].std == pytest.approx(sd[c], abs=1e-6)

    def test_crop_around_quad(self, rng):
        from vpp.geometry import Quad

        frame = random_rgb(rng, 100, 80)
        quad = Quad.from_bbox(40, 30, 20, 10)
        crop = crop_around_quad(frame, quad, scale=2.0)
        assert crop.width == pytest.approx(41, abs=2)
        assert crop.height == pytest.approx(21, abs=2)
        big = crop_around_quad(frame, Quad.from_bbox(0, 0, 99, 79), scale=2.0)
        assert (big.width, big.height) == (100, 80)
