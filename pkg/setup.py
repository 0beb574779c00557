import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="rydsat",
    version="0.1.0",
    author="The rydsat developers",
    description="Simulate a Rydberg atom receiver for satellite microwave signals",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests"]),
    package_data = {
        'rydsat': ['py.typed', 'scenarios/*.scenario'],
    },
    entry_points = {
        'console_scripts': ['rydsat=rydsat.cli:main'],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: BSD License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires='>=3.9',
    setup_requires=["setuptools-pipfile"],
    use_pipfile=True
)
