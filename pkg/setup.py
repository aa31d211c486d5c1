from setuptools import setup, find_packages

setup(
    name='dementia_detection',
    version='0.1',
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    include_package_data=True,
    install_requires=[
        'numpy>=1.17',
        'scikit-learn>=0.22',
        'matplotlib>=3.1',
        'tqdm',
    ],
    extras_require={
        'wordnet': ['nltk>=3.5'],
        'test': ['pytest>=6.0'],
    },
    entry_points={
        'console_scripts': ['dementia-detection=dementia_detection.cli:main'],
    },
    url='',
    license='',
    author='',
    author_email='',
    description='Dementia detection from speech transcripts, word timings and audio features'
)
