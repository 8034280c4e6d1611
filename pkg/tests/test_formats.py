import struct

import numpy as np
import pytest

from seisreg.formats import (
    DuplicateTrace,
    InconsistentTraceLength,
    MissingSection,
    RaggedRow,
    TraceLayout,
    TruncatedFile,
    UnsupportedFormatCode,
    VersionUnsupported,
    decode_svol,
    encode_svol,
    ibm_to_ieee,
    ieee_to_ibm,
    parse_las,
    parse_segy,
    volume_from_traces,
    write_las,
)
from seisreg.formats.las import LasParseError
from seisreg.formats.volume import SeismicVolume


def make_segy(traces, fmt=5, sample_interval_us=2000, samples_per_trace=None,
              payload_override=None):
    """traces: list of (inline, xline, samples)."""
    if samples_per_trace is None:
        samples_per_trace = len(traces[0][2])
    textual = b"\x40" * 3200
    binary = bytearray(400)
    struct.pack_into(">H", binary, 3217 - 3201, sample_interval_us)
    struct.pack_into(">H", binary, 3221 - 3201, samples_per_trace)
    struct.pack_into(">H", binary, 3225 - 3201, fmt)
    body = b""
    for inline, xline, samples in traces:
        th = bytearray(240)
        struct.pack_into(">i", th, 188, inline)
        struct.pack_into(">i", th, 192, xline)
        if payload_override is not None:
            payload = payload_override
        elif fmt == 5:
            payload = np.asarray(samples, dtype=">f4").tobytes()
        else:
            payload = b"".join(struct.pack(">I", ieee_to_ibm(s)) for s in samples)
        body += bytes(th) + payload
    return textual + bytes(binary) + body


class TestIbmFloat:
    def test_zero_pattern(self):
        assert ibm_to_ieee(0x00000000) == 0.0

    def test_one(self):
        # sign 0, exponent 0x41 = 65, fraction 2^20: 16^1 * 2^20/2^24 = 1
        assert ibm_to_ieee(0x41100000) == 1.0

    def test_minus_118(self):
        # sign 1, exponent 66, fraction 0x760000: 16^2 * 0x760000/2^24 = 118
        assert ibm_to_ieee(0xC2760000) == -118.0

    def test_zero_fraction_any_exponent(self):
        assert ibm_to_ieee(0x7F000000) == 0.0

    def test_exact_against_formula(self):
        # decoding is exact for every 24-bit fraction within double range
        rng = np.random.default_rng(42)
        for _ in range(500):
            sign = int(rng.integers(0, 2))
            exponent = int(rng.integers(40, 90))
            fraction = int(rng.integers(1, 1 << 24))
            word = (sign << 31) | (exponent << 24) | fraction
            expected = (-1.0) ** sign * 16.0 ** (exponent - 64) * fraction / 2.0 ** 24
            assert ibm_to_ieee(word) == expected

    def test_roundtrip_dyadics_exact(self):
        for v in (1.0, -1.0, 0.5, 0.0625, 118.0, -0.25):
            assert ibm_to_ieee(ieee_to_ibm(v)) == v

    def test_roundtrip_relative_error(self):
        rng = np.random.default_rng(1)
        values = rng.uniform(-5000.0, 5000.0, 1000)
        decoded = np.array([ibm_to_ieee(ieee_to_ibm(v)) for v in values])
        assert np.max(np.abs((decoded - values) / values)) < 1e-6


class TestSegy:
    def test_fixture_roundtrip(self):
        raw = parse_segy(make_segy([(1, 1, [0.0, 1.0, -1.0, 0.5])]))
        assert raw.binary_header.format_code == 5
        assert raw.binary_header.sample_interval_us == 2000
        np.testing.assert_array_equal(raw.traces[0].samples, [0.0, 1.0, -1.0, 0.5])

    def test_ibm_encoding_matches_ieee(self):
        samples = [0.0, 1.0, -1.0, 0.5]
        ieee = parse_segy(make_segy([(1, 1, samples)], fmt=5))
        ibm = parse_segy(make_segy([(1, 1, samples)], fmt=1))
        np.testing.assert_allclose(ibm.traces[0].samples, ieee.traces[0].samples,
                                   rtol=1e-6, atol=0)

    def test_dual_encoding_volumes_agree(self):
        rng = np.random.default_rng(5)
        samples = rng.uniform(-100.0, 100.0, 16).tolist()
        vol_ieee = volume_from_traces(parse_segy(make_segy([(1, 1, samples)], fmt=5)))
        vol_ibm = volume_from_traces(parse_segy(make_segy([(1, 1, samples)], fmt=1)))
        np.testing.assert_allclose(vol_ibm.data, vol_ieee.data, rtol=2e-6, atol=1e-12)

    def test_truncated_file(self):
        with pytest.raises(TruncatedFile):
            parse_segy(b"\x00" * 100)

    def test_unsupported_format_code(self):
        with pytest.raises(UnsupportedFormatCode):
            parse_segy(make_segy([(1, 1, [0.0] * 4)], fmt=3))

    def test_inconsistent_trace_length(self):
        # header claims 4 samples, payload carries 3
        short = np.asarray([0.0, 1.0, 2.0], dtype=">f4").tobytes()
        data = make_segy([(1, 1, [0.0] * 4)], samples_per_trace=4,
                         payload_override=short)
        with pytest.raises(InconsistentTraceLength):
            parse_segy(data)

    def test_configurable_header_offsets(self):
        data = make_segy([(7, 9, [1.0, 2.0])])
        raw = parse_segy(data, TraceLayout(inline_byte_offset=189,
                                           xline_byte_offset=193))
        assert (raw.traces[0].inline, raw.traces[0].xline) == (7, 9)


class TestVolumeFromTraces:
    def test_simple_grid(self):
        raw = parse_segy(make_segy([(1, 1, [1.0, 2.0]), (1, 2, [3.0, 4.0])]))
        vol = volume_from_traces(raw)
        assert vol.data.shape == (1, 2, 2)
        assert vol.mask.all()
        assert vol.dt_ms == 2.0

    def test_cartesian_closure_marks_missing(self):
        raw = parse_segy(make_segy([(1, 1, [1.0, 2.0]), (2, 2, [3.0, 4.0])]))
        vol = volume_from_traces(raw)
        assert vol.data.shape == (2, 2, 2)
        assert vol.mask[0, 0].all() and vol.mask[1, 1].all()
        assert not vol.mask[0, 1].any() and not vol.mask[1, 0].any()

    def test_duplicate_trace(self):
        raw = parse_segy(make_segy([(1, 1, [1.0, 2.0]), (1, 1, [3.0, 4.0])]))
        with pytest.raises(DuplicateTrace):
            volume_from_traces(raw)


MINIMAL_LAS = """~Version
 VERS.   2.0 : CWLS 2.0
 WRAP.   NO  :
~Well
 NULL.   -999.25 :
 WELL.   FIXTURE :
~Curve
 DEPT.M  : depth
 SF.V/V  : sand fraction
~ASCII
 1000.0 0.25
 1000.5 0.5
 1001.0 0.75
"""


class TestLas:
    def test_minimal_fixture(self):
        log = parse_las(MINIMAL_LAS)
        assert log.curve_names == ["DEPT", "SF"]
        assert log.rows.shape == (3, 2)
        np.testing.assert_array_equal(log.depths, [1000.0, 1000.5, 1001.0])

    def test_null_substitution(self):
        text = MINIMAL_LAS.replace("1000.5 0.5", "1000.5 -999.25")
        log = parse_las(text)
        assert np.isnan(log.rows[1, 1])
        assert not np.isnan(log.depths).any()

    def test_ragged_row(self):
        text = MINIMAL_LAS.replace("1000.5 0.5", "1000.5")
        with pytest.raises(RaggedRow):
            parse_las(text)

    def test_missing_section(self):
        text = MINIMAL_LAS.replace("~ASCII", "~Other")
        with pytest.raises(MissingSection):
            parse_las(text)

    def test_version_unsupported(self):
        text = MINIMAL_LAS.replace("VERS.   2.0", "VERS.   3.0")
        with pytest.raises(VersionUnsupported):
            parse_las(text)

    def test_null_in_depth_rejected(self):
        text = MINIMAL_LAS.replace("1000.5 0.5", "-999.25 0.5")
        with pytest.raises(LasParseError):
            parse_las(text)

    def test_non_monotone_depth_rejected(self):
        text = MINIMAL_LAS.replace("1000.5 0.5", "1001.0 0.5")
        with pytest.raises(LasParseError):
            parse_las(text)

    def test_write_parse_roundtrip(self):
        log = parse_las(MINIMAL_LAS)
        again = parse_las(write_las(log))
        np.testing.assert_array_equal(log.rows, again.rows)
        assert log.curve_names == again.curve_names
        assert again.null_value == log.null_value

    def test_roundtrip_full_precision(self):
        log = parse_las(MINIMAL_LAS)
        rng = np.random.default_rng(3)
        log.rows[:, 1] = rng.uniform(0.0, 1.0, 3)
        again = parse_las(write_las(log))
        np.testing.assert_array_equal(log.rows, again.rows)


class TestSvol:
    def _volume(self):
        rng = np.random.default_rng(11)
        data = rng.standard_normal((2, 3, 5))
        mask = np.ones(data.shape, dtype=bool)
        mask[1, 2, :] = False
        data[~mask] = 0.0
        return SeismicVolume(inlines=[10, 20], xlines=[1, 2, 3], t0_ms=100.0,
                             dt_ms=2.0, data=data, attribute_name="imp", mask=mask)

    def test_encode_decode_byte_identical(self):
        vol = self._volume()
        blob = encode_svol(vol)
        assert encode_svol(decode_svol(blob)) == blob

    def test_volume_fields_roundtrip(self):
        vol = self._volume()
        again = decode_svol(encode_svol(vol))
        np.testing.assert_array_equal(vol.data, again.data)
        np.testing.assert_array_equal(vol.mask, again.mask)
        np.testing.assert_array_equal(vol.inlines, again.inlines)
        assert (vol.t0_ms, vol.dt_ms, vol.attribute_name) == \
            (again.t0_ms, again.dt_ms, again.attribute_name)
