from setuptools import (
    setup,
    find_packages
)

with open('README.md', 'r') as fh:
    long_description = fh.read()

setup(
    name='pymab',
    version='0.1.0',
    description='Batched uniform random / Thompson Sampling / TS† bandit experiments and their analysis.',
    long_description=long_description,
    long_description_content_type='text/markdown',
    python_requires='>=3.8.0',
    license='MIT',
    packages=find_packages(
        exclude=[
            'tests.*',
            'tests'
        ]
    ),
    install_requires=[
        'numpy>=1.17',
        'scipy>=1.7',
        'pandas>=1.5',
        'PyYAML>=5.1'
    ],
    entry_points={
        'console_scripts': [
            'pymab=pymab.cli:main'
        ]
    },
    zip_safe=True,
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Intended Audience :: Education',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Topic :: Scientific/Engineering :: Mathematics'
    ]
)
