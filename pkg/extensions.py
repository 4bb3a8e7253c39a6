"""
Run-ledger database handle, bound to the app in create_app().
models.py holds the only tables; commands write them through this instance.
"""
from flask_sqlalchemy import SQLAlchemy

db = SQLAlchemy()
