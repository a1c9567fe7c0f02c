from setuptools import setup, find_packages

# Read the contents of requirements.txt
with open('requirements.txt') as f:
    required_packages = [line for line in f.read().splitlines() if line and not line.startswith('#')]

setup(
    name='crs-noma-lab',
    version='0.1.0',
    packages=find_packages(exclude=('tests', 'tests.*', 'examples', 'examples.*')),
    include_package_data=True,
    python_requires='>=3.10',
    install_requires=required_packages,
    extras_require={
        'test': ['pytest', 'hypothesis', 'mpmath'],
    },
    entry_points={
        'console_scripts': [
            'crs-noma-lab=crsnomalab.reports.cli:main',
        ],
    },
)
