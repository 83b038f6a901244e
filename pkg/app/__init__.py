"""Type checker and abstract machines for a classical sequent calculus with dependent choice"""

__version__ = "0.1.0"
