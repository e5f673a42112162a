# Item pipelines for the {{name}} project.

from itemadapter import ItemAdapter


class {{project_class}}Pipeline:
    def process_item(self, item, spider):
        adapter = ItemAdapter(item)
        if adapter.get('title'):
            adapter['title'] = adapter['title'].strip()
        return item
