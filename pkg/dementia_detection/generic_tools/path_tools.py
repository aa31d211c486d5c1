import os


def resolve_from_root(root, path):
    # relative paths in index and config files are read from their own directory
    if os.path.isabs(path):
        return path
    return os.path.normpath(os.path.join(root, path))


def ensure_directory(path):
    os.makedirs(path, exist_ok=True)
    return path
