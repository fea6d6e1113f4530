"""File format round-trips and malformed-input handling.

Every writer/reader pair must round-trip losslessly at declared
precision; every reader must answer mangled input with a DataIOError,
not an arbitrary exception. The heavy 1e5-case fuzz lives in the
acceptance suite; this module keeps targeted cases per format.
"""

import io
import struct

import numpy as np
import pytest

from ego3dtrack import dataio
from ego3dtrack.errors import DataIOError, DataValidationError, FormatError
from ego3dtrack.evaluation import GroundTruthInstance, MetricsReport
from ego3dtrack.geometry import DepthMap
from ego3dtrack.tracking import PROVENANCE_CARRY, PROVENANCE_FRESH, Proposal, Trajectory

from conftest import make_intrinsics, random_pose, random_unit


class TestIntrinsics:
    def test_round_trip(self, tmp_path):
        intr = make_intrinsics(fx=123.456, fy=789.01, cx=320.25, cy=240.75)
        path = tmp_path / "intr.txt"
        dataio.write_intrinsics(path, intr)
        back = dataio.read_intrinsics(path)
        assert back == intr

    def test_wrong_field_count(self):
        with pytest.raises(FormatError):
            dataio.read_intrinsics(io.StringIO("1 2 3\n"))

    def test_semantic_validation_wrapped(self):
        # Principal point outside the image: parses, then fails validation.
        with pytest.raises(DataValidationError):
            dataio.read_intrinsics(io.StringIO("100 100 900 50 640 480\n"))


class TestPoses:
    def test_identity_line(self):
        poses = dataio.read_poses(io.StringIO("0 0 0 0 0 0 0 1\n"))
        assert len(poses) == 1
        np.testing.assert_allclose(poses[0].rotation, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(poses[0].translation, np.zeros(3))
        assert poses[0].timestamp == 0

    def test_round_trip_random(self, tmp_path, rng):
        poses = [random_pose(rng, timestamp=f) for f in range(20)]
        path = tmp_path / "poses.txt"
        dataio.write_poses(path, poses)
        back = dataio.read_poses(path)
        assert len(back) == 20
        for a, b in zip(poses, back):
            assert a.timestamp == b.timestamp
            np.testing.assert_allclose(a.rotation, b.rotation, atol=1e-9)
            np.testing.assert_allclose(a.translation, b.translation, atol=1e-9)

    def test_non_unit_quaternion_rejected(self):
        with pytest.raises(DataValidationError):
            dataio.read_poses(io.StringIO("0 0 0 0 0 0 0 0.5\n"))

    def test_out_of_order_frames_rejected(self):
        text = "0 0 0 0 0 0 0 1\n0 1 1 1 0 0 0 1\n"
        with pytest.raises(DataValidationError):
            dataio.read_poses(io.StringIO(text))

    def test_malformed_line_reports_line_number(self):
        try:
            dataio.read_poses(io.StringIO("# ok\n0 0 0 0 0 0 0 1\n1 x 0 0 0 0 0 1\n"))
        except FormatError as exc:
            assert exc.line == 3
        else:
            pytest.fail("expected FormatError")

    def test_comments_and_blanks_ignored(self):
        text = "# header\n\n0 0 0 0 0 0 0 1  # trailing comment\n"
        assert len(dataio.read_poses(io.StringIO(text))) == 1


class TestDepth:
    def test_round_trip_with_nan(self, tmp_path):
        values = np.array([[1.0, np.nan], [0.5, 2.0]], dtype=np.float32)
        path = tmp_path / "d.depth"
        dataio.write_depth(path, DepthMap(values=values))
        back = dataio.read_depth(path)
        np.testing.assert_array_equal(
            np.isnan(back.values), np.isnan(values)
        )
        np.testing.assert_array_equal(back.values[~np.isnan(values)], values[~np.isnan(values)])

    def test_bad_magic(self):
        with pytest.raises(FormatError):
            dataio.read_depth(io.BytesIO(b"XXXX" + struct.pack("<II", 1, 1) + b"\0" * 4))

    def test_truncated_payload(self):
        # Header says 4x4 but only 15 floats present.
        payload = struct.pack("<15f", *range(15))
        data = dataio.DEPTH_MAGIC + struct.pack("<II", 4, 4) + payload
        with pytest.raises(FormatError):
            dataio.read_depth(io.BytesIO(data))

    def test_exact_size_accepted(self, rng):
        # Any file of exactly 12 + 4*w*h bytes parses.
        for w, h in [(1, 1), (3, 7), (16, 2)]:
            values = rng.uniform(0.1, 5.0, (h, w)).astype("<f4")
            data = dataio.DEPTH_MAGIC + struct.pack("<II", w, h) + values.tobytes()
            back = dataio.read_depth(io.BytesIO(data))
            assert back.width == w and back.height == h

    def test_short_header(self):
        with pytest.raises(FormatError):
            dataio.read_depth(io.BytesIO(b"D3"))

    def test_zero_dimension_rejected(self):
        data = dataio.DEPTH_MAGIC + struct.pack("<II", 0, 4)
        with pytest.raises(FormatError):
            dataio.read_depth(io.BytesIO(data))

    def test_out_of_range_depth_rejected(self):
        values = np.array([[50.0]], dtype="<f4")
        data = dataio.DEPTH_MAGIC + struct.pack("<II", 1, 1) + values.tobytes()
        with pytest.raises(DataValidationError):
            dataio.read_depth(io.BytesIO(data))


def make_proposals(rng, frames=3, per_frame=2, dim=8):
    out = {}
    for f in range(frames):
        props = []
        for _ in range(per_frame):
            x0, y0 = rng.uniform(0, 100, 2)
            props.append(
                Proposal(
                    bbox=(x0, y0, x0 + rng.uniform(5, 20), y0 + rng.uniform(5, 20)),
                    score=float(rng.uniform(0, 1)),
                    embedding=random_unit(rng, dim),
                )
            )
        out[f] = props
    return out


class TestProposals:
    def test_round_trip(self, tmp_path, rng):
        original = make_proposals(rng)
        path = tmp_path / "props.txt"
        dataio.write_proposals(path, original)
        back = dataio.read_proposals(path)
        assert sorted(back) == sorted(original)
        for f in original:
            assert len(back[f]) == len(original[f])
            for a, b in zip(original[f], back[f]):
                assert a.bbox == b.bbox
                assert a.score == b.score
                np.testing.assert_allclose(a.embedding, b.embedding, atol=1e-12)

    def test_out_of_order_frames_sorted_stably(self, rng):
        e1 = " ".join(repr(float(v)) for v in random_unit(rng, 4))
        e2 = " ".join(repr(float(v)) for v in random_unit(rng, 4))
        text = (
            "dim 4\n"
            f"5 0 0 10 10 0.5 {e1}\n"
            f"0 0 0 10 10 0.5 {e2}\n"
            f"5 20 20 30 30 0.7 {e1}\n"
        )
        back = dataio.read_proposals(io.StringIO(text))
        assert list(back) == [0, 5]
        assert [p.bbox[0] for p in back[5]] == [0.0, 20.0]  # in-file order kept

    def test_zero_norm_embedding_rejected(self):
        text = "dim 3\n0 0 0 10 10 0.5 0 0 0\n"
        with pytest.raises(DataValidationError):
            dataio.read_proposals(io.StringIO(text))

    def test_near_unit_renormalized(self):
        text = "dim 2\n0 0 0 10 10 0.5 1.005 0\n"
        back = dataio.read_proposals(io.StringIO(text))
        assert np.linalg.norm(back[0][0].embedding) == pytest.approx(1.0, abs=1e-12)

    def test_norm_outside_tolerance_rejected(self):
        text = "dim 2\n0 0 0 10 10 0.5 1.5 0\n"
        with pytest.raises(DataValidationError):
            dataio.read_proposals(io.StringIO(text))

    def test_missing_header(self):
        with pytest.raises(FormatError):
            dataio.read_proposals(io.StringIO("0 0 0 10 10 0.5 1 0\n"))

    def test_dimension_mismatch_vs_header(self):
        text = "dim 3\n0 0 0 10 10 0.5 1 0\n"
        with pytest.raises(FormatError):
            dataio.read_proposals(io.StringIO(text))


class TestAnnotations:
    def make_set(self):
        inst = GroundTruthInstance(
            instance_id="mug",
            stationary_intervals=[(0, 9, np.array([1.0, 2.0, 0.5])), (20, 29, np.array([2.0, 2.0, 0.5]))],
            boxes_2d={0: (10.0, 12.0, 40.0, 42.0), 5: (11.0, 12.0, 41.0, 42.0)},
            visibility={0: True, 5: False},
        )
        return dataio.AnnotationSet(instances=[inst], num_frames=30, image_size=(100, 100))

    def test_round_trip(self, tmp_path):
        original = self.make_set()
        path = tmp_path / "ann.txt"
        dataio.write_annotations(path, original)
        back = dataio.read_annotations(path)
        assert back.num_frames == 30 and back.image_size == (100, 100)
        a, b = original.instances[0], back.instances[0]
        assert b.instance_id == a.instance_id
        assert len(b.stationary_intervals) == 2
        for (s1, e1, c1), (s2, e2, c2) in zip(a.stationary_intervals, b.stationary_intervals):
            assert (s1, e1) == (s2, e2)
            np.testing.assert_allclose(c1, c2)
        assert b.boxes_2d == a.boxes_2d
        assert b.visibility == a.visibility

    def test_minimal_file(self):
        text = "num_frames 10\ninstance cup\ninterval 0 9 1 2 3\n"
        back = dataio.read_annotations(io.StringIO(text))
        assert back.instances[0].instance_id == "cup"

    def test_overlapping_intervals_rejected(self):
        text = (
            "num_frames 20\ninstance cup\n"
            "interval 0 9 1 2 3\ninterval 5 15 1 2 3\n"
        )
        with pytest.raises(DataValidationError):
            dataio.read_annotations(io.StringIO(text))

    def test_box_outside_image_rejected(self):
        text = (
            "num_frames 10\nimage_size 50 50\ninstance cup\n"
            "interval 0 9 1 2 3\nbox 0 10 10 60 20 1\n"
        )
        with pytest.raises(DataValidationError):
            dataio.read_annotations(io.StringIO(text))

    def test_interval_beyond_num_frames_rejected(self):
        text = "num_frames 5\ninstance cup\ninterval 0 9 1 2 3\n"
        with pytest.raises(DataValidationError):
            dataio.read_annotations(io.StringIO(text))

    def test_missing_num_frames(self):
        with pytest.raises(FormatError):
            dataio.read_annotations(io.StringIO("instance cup\n"))


class TestEnrollment:
    def test_svoe_round_trip(self, tmp_path):
        records = [dataio.SvoeRecord("mug", 12, (10.0, 10.0, 40.0, 40.0))]
        path = tmp_path / "svoe.txt"
        dataio.write_enrollment_svoe(path, records)
        back = dataio.read_enrollment_svoe(path)
        assert back == records

    def test_svoe_small_box_warns(self):
        text = "svoe cup 0 0 0 10 10\n"  # 100 px^2 < 500
        with pytest.warns(UserWarning, match="below the recommended"):
            records = dataio.read_enrollment_svoe(io.StringIO(text))
        assert records[0].instance_id == "cup"

    def test_svoe_duplicate_id_rejected(self):
        text = "svoe cup 0 0 0 40 40\nsvoe cup 1 0 0 40 40\n"
        with pytest.raises(DataValidationError):
            dataio.read_enrollment_svoe(io.StringIO(text))

    def test_mvpe_round_trip(self, tmp_path, rng):
        enrollment = dataio.MvpeEnrollment(dim=6)
        enrollment.views["mug"] = [random_unit(rng, 6) for _ in range(3)]
        enrollment.image_paths["cup"] = ["views/cup_01.png"]
        path = tmp_path / "mvpe.txt"
        dataio.write_enrollment_mvpe(path, enrollment)
        back = dataio.read_enrollment_mvpe(path)
        assert back.dim == 6
        assert len(back.views["mug"]) == 3
        for a, b in zip(enrollment.views["mug"], back.views["mug"]):
            np.testing.assert_allclose(a, b, atol=1e-12)
        assert back.image_paths == {"cup": ["views/cup_01.png"]}

    def test_mvpe_dim_mismatch_rejected(self):
        text = "dim 4\nview cup 1 0 0\n"
        with pytest.raises(FormatError):
            dataio.read_enrollment_mvpe(io.StringIO(text))


class TestTrajectories:
    def test_round_trip(self, tmp_path):
        traj = Trajectory()
        traj.add(0, [1.0, 2.0, 3.0], PROVENANCE_FRESH)
        traj.add(1, [1.0, 2.0, 3.0], PROVENANCE_CARRY)
        path = tmp_path / "traj.txt"
        dataio.write_trajectories(path, {"mug": traj})
        back = dataio.read_trajectories(path)
        assert list(back) == ["mug"]
        assert back["mug"].frames() == [0, 1]
        np.testing.assert_allclose(back["mug"].point_at(0), [1, 2, 3])
        assert back["mug"].entry(1).provenance == PROVENANCE_CARRY

    def test_duplicate_frame_rejected(self):
        text = "traj m 0 1 2 3 fresh-detection\ntraj m 0 1 2 3 memory-carry\n"
        with pytest.raises(DataValidationError):
            dataio.read_trajectories(io.StringIO(text))

    def test_unknown_provenance_rejected(self):
        with pytest.raises(FormatError):
            dataio.read_trajectories(io.StringIO("traj m 0 1 2 3 guessed\n"))


class TestReportFile:
    def test_round_trip(self, tmp_path):
        report = MetricsReport(
            thresholds=(0.25, 0.5), tp=(1, 2), fp=(0, 0), fn=(1, 0),
            mean_l2=0.125, mean_angular=None, paired_count=2,
        )
        path = tmp_path / "report.json"
        dataio.write_report(path, report)
        assert dataio.read_report(path) == report

    def test_invalid_json(self):
        with pytest.raises(FormatError):
            dataio.read_report(io.StringIO("{not json"))

    def test_wrong_structure(self):
        with pytest.raises(DataValidationError):
            dataio.read_report(io.StringIO('{"thresholds": "what"}'))


class TestManifest:
    def test_same_content_same_hash(self, tmp_path):
        for name in ("a.txt", "b.txt"):
            (tmp_path / name).write_text(name)
        m1 = dataio.write_manifest(tmp_path, ["a.txt", "b.txt"])
        m2 = dataio.write_manifest(tmp_path, ["b.txt", "a.txt"])
        assert m1["combined"] == m2["combined"]

    def test_content_change_changes_hash(self, tmp_path):
        (tmp_path / "a.txt").write_text("one")
        m1 = dataio.write_manifest(tmp_path, ["a.txt"])
        (tmp_path / "a.txt").write_text("two")
        m2 = dataio.write_manifest(tmp_path, ["a.txt"])
        assert m1["combined"] != m2["combined"]


class TestReaderRobustness:
    """Mangled bytes must produce DataIOError, never anything else."""

    READERS = [
        ("poses", dataio.read_poses, False),
        ("intrinsics", dataio.read_intrinsics, False),
        ("proposals", dataio.read_proposals, False),
        ("annotations", dataio.read_annotations, False),
        ("svoe", dataio.read_enrollment_svoe, False),
        ("mvpe", dataio.read_enrollment_mvpe, False),
        ("trajectories", dataio.read_trajectories, False),
        ("report", dataio.read_report, False),
        ("depth", dataio.read_depth, True),
    ]

    @pytest.mark.parametrize("name,reader,binary", READERS)
    def test_random_bytes(self, name, reader, binary, rng):
        import warnings as _warnings

        for _ in range(50):
            blob = bytes(rng.integers(0, 256, rng.integers(0, 400)))
            src = io.BytesIO(blob) if binary else io.StringIO(
                blob.decode("utf-8", errors="replace")
            )
            with _warnings.catch_warnings():
                _warnings.simplefilter("ignore")
                try:
                    reader(src)
                except DataIOError:
                    pass
