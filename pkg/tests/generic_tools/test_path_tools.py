import os

from dementia_detection.generic_tools.path_tools import ensure_directory, resolve_from_root


def test_resolve_from_root(tmp_path):
    root = str(tmp_path)
    assert resolve_from_root(root, "transcripts/../audio/s1") == os.path.join(root, "audio", "s1")
    absolute = os.path.join(root, "elsewhere.cha")
    assert resolve_from_root("/unused", absolute) == absolute


def test_ensure_directory_is_idempotent(tmp_path):
    path = os.path.join(str(tmp_path), "a", "b")
    assert ensure_directory(path) == path
    assert ensure_directory(path) == path
    assert os.path.isdir(path)
