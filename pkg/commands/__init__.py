"""Register every CLI blueprint with the Flask app."""
from commands.classify import bp as classify_bp
from commands.train import bp as train_bp
from commands.evaluate import bp as evaluate_bp
from commands.adversarial import bp as adversarial_bp
from commands.quality import bp as quality_bp


def register_commands(app):
    app.register_blueprint(classify_bp)
    app.register_blueprint(train_bp)
    app.register_blueprint(evaluate_bp)
    app.register_blueprint(adversarial_bp)
    app.register_blueprint(quality_bp)
