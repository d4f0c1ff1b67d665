from sys import path
from os.path import dirname


path.append(dirname(__file__))
