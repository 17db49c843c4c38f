from setuptools import find_packages, setup

with open('requirements.txt', encoding='utf-8') as f:
    requirements = [line.strip() for line in f if line.strip() and not line.startswith('pytest')]

setup(
    name='minimaple',
    version='0.1.0',
    description='Type checking and reference execution for annotated MiniMaple programs',
    packages=find_packages(exclude=('tests',)),
    package_data={'minimaple': ['config.json', 'templates/*.j2']},
    install_requires=requirements,
    extras_require={'test': ['pytest']},
    python_requires='>=3.10',
    entry_points={
        'console_scripts': ['minimaple=minimaple.cli:main'],
    },
)
